//! Steady and time-periodic localized states: Newton solvers, pseudo-arclength
//! continuation with fold detection, and stability classification.
//!
//! All problems are posed on reflection-symmetric fields (see [`basis`]), which
//! removes the translation mode without a phase condition.

pub mod basis;
pub mod branch;
pub mod fcgl;
pub mod harmonic;
pub mod stability;

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, Solve};

use crate::error::{Error, Result};
use crate::floquet::linalg_err;

pub use basis::EvenBasis;
pub use branch::{continue_branch, Branch, BranchPoint, ContinuationSettings, Fold, FoldKind, Termination};
pub use fcgl::SteadyFcgl;
pub use harmonic::{project_snapshots, HarmonicPde};
pub use stability::{classify_fcgl, classify_pde, PdeStabilitySettings, Stability};

/// A real nonlinear system `R(x, lambda) = 0` with a dense Jacobian.
pub trait SteadyProblem {
    fn dim(&self) -> usize;

    fn residual(&self, x: &[f64], lambda: f64) -> Vec<f64>;

    /// Size of a residual vector used for the convergence test (grid max-norm).
    fn residual_size(&self, r: &[f64]) -> f64;

    fn jacobian(&self, x: &[f64], lambda: f64) -> Array2<f64>;

    fn param_derivative(&self, x: &[f64], lambda: f64) -> Vec<f64>;

    /// Bifurcation-diagram norm of a state.
    fn norm(&self, x: &[f64]) -> f64;

    /// Diagonal weights with `sum w_i x_i^2 = norm(x)^2`.
    fn weights(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 25 }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn solve_dense(mat: Array2<f64>, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let lu = mat.factorize_into().map_err(linalg_err)?;
    let sol = lu.solve(&Array1::from(rhs)).map_err(linalg_err)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearAlgebra("singular Jacobian".into()));
    }
    Ok(sol.to_vec())
}

/// Newton iteration at fixed parameter.
pub fn newton<P: SteadyProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    lambda: f64,
    settings: NewtonSettings,
) -> Result<NewtonReport> {
    if x0.len() != problem.dim() {
        return Err(Error::Shape { expected: problem.dim(), got: x0.len() });
    }
    let mut x = x0.to_vec();
    let mut r = problem.residual(&x, lambda);
    let mut size = problem.residual_size(&r);
    for it in 0..=settings.max_iter {
        if !size.is_finite() {
            return Err(Error::Divergence { iterations: it, residual: size });
        }
        if size < settings.tol {
            return Ok(NewtonReport { x, iterations: it, residual: size });
        }
        if it == settings.max_iter {
            break;
        }
        let dx = solve_dense(problem.jacobian(&x, lambda), r)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
        r = problem.residual(&x, lambda);
        size = problem.residual_size(&r);
    }
    Err(Error::Divergence { iterations: settings.max_iter, residual: size })
}

/// Point on the extended `(x, lambda)` space with its weighted metric.
#[derive(Debug, Clone)]
pub(crate) struct Metric {
    pub w: Vec<f64>,
    pub param_weight: f64,
}

impl Metric {
    pub fn dot(&self, a: (&[f64], f64), b: (&[f64], f64)) -> f64 {
        let s: f64 = self.w.iter().zip(a.0).zip(b.0).map(|((w, x), y)| w * x * y).sum();
        s + self.param_weight * a.1 * b.1
    }

    pub fn normalise(&self, v: (&mut [f64], &mut f64)) {
        let n = self.dot((v.0, *v.1), (v.0, *v.1)).sqrt();
        for x in v.0.iter_mut() {
            *x /= n;
        }
        *v.1 /= n;
    }
}

/// Newton on `R(x, lambda) = 0` together with the hyperplane condition
/// `<t, (x, lambda) - (x_p, lambda_p)> = 0`.
pub(crate) fn corrector<P: SteadyProblem + ?Sized>(
    problem: &P,
    metric: &Metric,
    pred: (&[f64], f64),
    tangent: (&[f64], f64),
    settings: NewtonSettings,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = problem.dim();
    let mut x = pred.0.to_vec();
    let mut lam = pred.1;
    for it in 0..=settings.max_iter {
        let r = problem.residual(&x, lam);
        let size = problem.residual_size(&r);
        if !size.is_finite() {
            return Err(Error::Divergence { iterations: it, residual: size });
        }
        let dx: Vec<f64> = x.iter().zip(pred.0).map(|(a, b)| a - b).collect();
        let h = metric.dot((&dx, lam - pred.1), tangent);
        if size < settings.tol && h.abs() < 1e-12 {
            return Ok((x, lam, it));
        }
        if it == settings.max_iter {
            return Err(Error::Divergence { iterations: it, residual: size });
        }
        let mut m = Array2::<f64>::zeros((n + 1, n + 1));
        m.slice_mut(ndarray::s![..n, ..n]).assign(&problem.jacobian(&x, lam));
        let rl = problem.param_derivative(&x, lam);
        for i in 0..n {
            m[[i, n]] = rl[i];
            m[[n, i]] = metric.w[i] * tangent.0[i];
        }
        m[[n, n]] = metric.param_weight * tangent.1;
        let mut rhs = r;
        rhs.push(h);
        let d = solve_dense(m, rhs)?;
        for i in 0..n {
            x[i] -= d[i];
        }
        lam -= d[n];
    }
    unreachable!()
}

/// Tangent at a regular point: `J v = -R_lambda`, oriented so that `lambda`
/// moves in `direction`.
pub(crate) fn initial_tangent<P: SteadyProblem + ?Sized>(
    problem: &P,
    metric: &Metric,
    x: &[f64],
    lambda: f64,
    direction: f64,
) -> Result<(Vec<f64>, f64)> {
    let rl: Vec<f64> = problem.param_derivative(x, lambda).iter().map(|v| -v).collect();
    let mut v = solve_dense(problem.jacobian(x, lambda), rl)?;
    let mut tl = 1.0;
    if direction < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
        tl = -1.0;
    }
    metric.normalise((&mut v, &mut tl));
    Ok((v, tl))
}
