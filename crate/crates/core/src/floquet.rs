//! Linear theory of the forced oscillator: the dispersion relation, the
//! weak-limit onset, and the damped Mathieu problem
//!
//! `L p = p'' - 2 mu p' + (mu^2 + omega^2 + omega F cos 2t) p = 0`
//!
//! whose subharmonic (period 2 pi) solutions set the critical forcing `F_c`.
//! `F_c` is computed twice: by harmonic balance (Hill's method) and by
//! integrating the monodromy matrix over one forcing period.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default Hill truncation: odd harmonics up to `2J + 1`.
pub const DEFAULT_HILL_ORDER: usize = 16;

const MONODROMY_STEPS: usize = 4000;

pub fn growth_rate(k: f64, p: &ModelParams) -> Complex64 {
    Complex64::new(p.mu - p.alpha * k * k, p.omega - p.beta * k * k)
}

/// `F_0 = 4 sqrt(mu^2 + nu^2)` in amplitude-equation units.
pub fn weak_critical_forcing(mu: f64, nu: f64) -> f64 {
    4.0 * mu.hypot(nu)
}

pub(crate) fn linalg_err(e: ndarray_linalg::error::LinalgError) -> Error {
    Error::LinearAlgebra(e.to_string())
}

/// Truncated Fourier series `f(t) = sum_{|n| <= max} c_n e^{int}` of a
/// 2 pi-periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    max: usize,
    coeffs: Vec<Complex64>,
}

impl TrigSeries {
    pub fn zeros(max: usize) -> Self {
        Self { max, coeffs: vec![Complex64::new(0.0, 0.0); 2 * max + 1] }
    }

    pub fn from_coeffs(max: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let m = max as i64;
        Self { max, coeffs: (-m..=m).map(f).collect() }
    }

    /// Projection of `m` equispaced samples on `[0, 2 pi)` onto `|n| <= max`.
    pub fn from_samples(samples: &[Complex64], max: usize) -> Result<Self> {
        let m = samples.len();
        if m < 2 * max + 1 {
            return Err(Error::Shape { expected: 2 * max + 1, got: m });
        }
        Ok(Self::from_coeffs(max, |n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let t = 2.0 * PI * j as f64 / m as f64;
                acc += s * Complex64::from_polar(1.0, -(n as f64) * t);
            }
            acc / m as f64
        }))
    }

    pub fn max_harmonic(&self) -> usize {
        self.max
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.max as i64) as usize]
    }

    pub fn set(&mut self, n: i64, value: Complex64) {
        assert!(n.unsigned_abs() as usize <= self.max, "harmonic {n} outside series of order {}", self.max);
        self.coeffs[(n + self.max as i64) as usize] = value;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let m = self.max as i64;
        (-m..=m).map(|n| self.coeff(n) * Complex64::from_polar(1.0, n as f64 * t)).sum()
    }

    pub fn samples(&self, m: usize) -> Vec<Complex64> {
        (0..m).map(|j| self.eval(2.0 * PI * j as f64 / m as f64)).collect()
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(self.max, |n| self.coeff(n) * Complex64::new(0.0, n as f64))
    }

    pub fn padded(&self, max: usize) -> Self {
        Self::from_coeffs(max.max(self.max), |n| self.coeff(n))
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        Self::from_coeffs(self.max, |n| f(n, self.coeff(n)))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map_coeffs(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let max = self.max.max(other.max);
        Self::from_coeffs(max, |n| self.coeff(n) + other.coeff(n))
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest violation of `c_{-n} = conj(c_n)`.
    pub fn reality_defect(&self) -> f64 {
        let m = self.max as i64;
        (0..=m).map(|n| (self.coeff(-n) - self.coeff(n).conj()).norm()).fold(0.0, f64::max)
    }
}

/// `<f, g> = (1/2 pi) int_0^{2 pi} conj(f) g dt`.
pub fn time_inner_product(f: &TrigSeries, g: &TrigSeries) -> Result<Complex64> {
    if f.max != g.max {
        return Err(Error::Shape { expected: f.coeffs.len(), got: g.coeffs.len() });
    }
    Ok(f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a.conj() * b).sum())
}

/// The same inner product on equispaced samples (exact for band-limited
/// products resolved by the grid).
pub fn sampled_inner_product(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::Shape { expected: f.len(), got: g.len() });
    }
    let s: Complex64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
    Ok(s / f.len() as f64)
}

/// `L g` (or `L^dagger g`) for forcing amplitude `f`; the result carries two
/// more harmonics than `g`.
pub fn mathieu_apply(g: &TrigSeries, mu: f64, omega: f64, f: f64, adjoint: bool) -> TrigSeries {
    let sign = if adjoint { 1.0 } else { -1.0 };
    let base = mu * mu + omega * omega;
    let half = 0.5 * omega * f;
    TrigSeries::from_coeffs(g.max + 2, |n| {
        let nf = n as f64;
        let d = Complex64::new(base - nf * nf, sign * 2.0 * mu * nf);
        d * g.coeff(n) + half * (g.coeff(n - 2) + g.coeff(n + 2))
    })
}

/// Critical subharmonic eigenfunction data at `F_c`.
#[derive(Debug, Clone)]
pub struct FloquetPair {
    pub f_c: f64,
    pub mu: f64,
    pub omega: f64,
    pub p: TrigSeries,
    /// `q = -(p' - mu p) / omega`.
    pub q: TrigSeries,
    pub p_adj: TrigSeries,
    /// `||L p||` including the harmonics spilled past the truncation.
    pub residual: f64,
    pub adjoint_residual: f64,
}

impl FloquetPair {
    /// `p + i q`, normalised to unit norm.
    pub fn envelope(&self) -> TrigSeries {
        self.p.add(&self.q.scaled(Complex64::new(0.0, 1.0)))
    }

    /// Rows `(t, p, q, p_adj)` over one period.
    pub fn table(&self, m: usize) -> Vec<[f64; 4]> {
        (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                [t, self.p.eval(t).re, self.q.eval(t).re, self.p_adj.eval(t).re]
            })
            .collect()
    }
}

/// Real `2(J+1)` Hill matrix acting on `(Re c_n, Im c_n)` for odd `n = 1..2J+1`.
fn hill_matrix(mu: f64, omega: f64, order: usize, f: f64, adjoint: bool) -> Array2<f64> {
    let k = order + 1;
    let mut m = Array2::<f64>::zeros((2 * k, 2 * k));
    let sign = if adjoint { 1.0 } else { -1.0 };
    let s = 0.5 * omega * f;
    for i in 0..k {
        let n = (2 * i + 1) as f64;
        let d = Complex64::new(mu * mu + omega * omega - n * n, sign * 2.0 * mu * n);
        m[[2 * i, 2 * i]] += d.re;
        m[[2 * i, 2 * i + 1]] -= d.im;
        m[[2 * i + 1, 2 * i]] += d.im;
        m[[2 * i + 1, 2 * i + 1]] += d.re;
        if i == 0 {
            // c_{-1} = conj(c_1)
            m[[0, 0]] += s;
            m[[1, 1]] -= s;
        } else {
            m[[2 * i, 2 * i - 2]] += s;
            m[[2 * i + 1, 2 * i - 1]] += s;
        }
        if i + 1 < k {
            m[[2 * i, 2 * i + 2]] += s;
            m[[2 * i + 1, 2 * i + 3]] += s;
        }
    }
    m
}

fn null_series(mat: &Array2<f64>, order: usize) -> Result<TrigSeries> {
    let (_, _, vt) = mat.svd(false, true).map_err(linalg_err)?;
    let vt = vt.ok_or_else(|| Error::LinearAlgebra("SVD returned no right vectors".into()))?;
    let v = vt.row(vt.nrows() - 1);
    let max = 2 * order + 1;
    let mut s = TrigSeries::zeros(max);
    for i in 0..=order {
        let c = Complex64::new(v[2 * i], v[2 * i + 1]);
        let n = (2 * i + 1) as i64;
        s.set(n, c);
        s.set(-n, c.conj());
    }
    Ok(s)
}

/// Fixes scale and sign: unit norm of `s`, positive real part of the `e^{it}`
/// coefficient of `gauge(s)`.
fn normalise(s: &TrigSeries, gauge: &TrigSeries) -> TrigSeries {
    let nrm = gauge.norm();
    let sign = if gauge.coeff(1).re < 0.0 { -1.0 } else { 1.0 };
    s.scaled(Complex64::new(sign / nrm, 0.0))
}

/// Candidate forcings `F > 0` at which a subharmonic solution exists, in
/// increasing order, from the Hill truncation of order `order`.
pub fn hill_critical_forcings(mu: f64, omega: f64, order: usize) -> Result<Vec<f64>> {
    let d = hill_matrix(mu, omega, order, 0.0, false);
    let s = &hill_matrix(mu, omega, order, 1.0, false) - &d;
    let dinv = d.inv().map_err(linalg_err)?;
    let m = -dinv.dot(&s);
    let (vals, _) = m.eig().map_err(linalg_err)?;
    let mut out: Vec<f64> = vals
        .iter()
        .filter(|e| e.re > 0.0 && e.im.abs() <= 1e-9 * e.norm())
        .map(|e| 1.0 / e.re)
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Smallest critical forcing with its normalised eigenfunction and adjoint.
pub fn mathieu_critical(p: &ModelParams, order: usize) -> Result<FloquetPair> {
    let (mu, omega) = (p.mu, p.omega);
    if !(mu < 0.0) {
        return Err(Error::Parameter(format!("Mathieu problem needs damping mu < 0, got {mu}")));
    }
    if order == 0 {
        return Err(Error::Parameter("Hill truncation order must be at least 1".into()));
    }
    let forcings = hill_critical_forcings(mu, omega, order)?;
    let f_c = *forcings.first().ok_or(Error::NotFound { lo: 0.0, hi: f64::INFINITY })?;

    let raw = null_series(&hill_matrix(mu, omega, order, f_c, false), order)?;
    let q_of = |p: &TrigSeries| p.map_coeffs(|n, c| -(Complex64::new(-mu, n as f64)) * c / omega);
    let z = raw.add(&q_of(&raw).scaled(Complex64::new(0.0, 1.0)));
    let pp = normalise(&raw, &z);
    let q = q_of(&pp);

    let raw_adj = null_series(&hill_matrix(mu, omega, order, f_c, true), order)?;
    let p_adj = normalise(&raw_adj, &raw_adj);

    let residual = mathieu_apply(&pp, mu, omega, f_c, false).norm();
    let adjoint_residual = mathieu_apply(&p_adj, mu, omega, f_c, true).norm();
    Ok(FloquetPair { f_c, mu, omega, p: pp, q, p_adj, residual, adjoint_residual })
}

/// Monodromy matrix of `(p, p')` over one forcing period `pi` (classical RK4).
pub fn monodromy(f: f64, mu: f64, omega: f64, steps: usize) -> [[f64; 2]; 2] {
    let rhs = |t: f64, x: [f64; 2]| -> [f64; 2] {
        let k2 = mu * mu + omega * omega + omega * f * (2.0 * t).cos();
        [x[1], 2.0 * mu * x[1] - k2 * x[0]]
    };
    let h = PI / steps as f64;
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for col in cols.iter_mut() {
        let mut x = *col;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = rhs(t, x);
            let k2 = rhs(t + 0.5 * h, [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(t + 0.5 * h, [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(t + h, [x[0] + h * k3[0], x[1] + h * k3[1]]);
            for d in 0..2 {
                x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
        }
        *col = x;
    }
    // cols[j] is the image of the j-th unit vector.
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

/// Eigenvalues of the monodromy matrix at forcing `f`.
pub fn floquet_multipliers(f: f64, p: &ModelParams) -> Result<[Complex64; 2]> {
    if !f.is_finite() {
        return Err(Error::Parameter(format!("forcing must be finite, got {f}")));
    }
    let m = monodromy(f, p.mu, p.omega, MONODROMY_STEPS);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(tr.is_finite() && det.is_finite()) {
        return Err(Error::LinearAlgebra("monodromy integration overflowed".into()));
    }
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    Ok([0.5 * tr + disc, 0.5 * tr - disc])
}

/// `1 + tr M + det M`: vanishes when a multiplier equals `-1`.
fn subharmonic_criterion(f: f64, mu: f64, omega: f64) -> f64 {
    let m = monodromy(f, mu, omega, MONODROMY_STEPS);
    1.0 + m[0][0] + m[1][1] + m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// First forcing in `(0, f_max]` where a multiplier crosses `-1`, located by
/// a scan and bisection on the monodromy criterion.
pub fn monodromy_critical(p: &ModelParams, f_max: f64) -> Result<f64> {
    let (mu, omega) = (p.mu, p.omega);
    let scan = 400;
    let mut lo = 0.0;
    let mut g_lo = subharmonic_criterion(lo, mu, omega);
    for i in 1..=scan {
        let hi = f_max * i as f64 / scan as f64;
        let g_hi = subharmonic_criterion(hi, mu, omega);
        if g_lo.signum() != g_hi.signum() {
            let (mut a, mut b, mut ga) = (lo, hi, g_lo);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if b - a <= 1e-15 * b {
                    break;
                }
                let gm = subharmonic_criterion(m, mu, omega);
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
        g_lo = g_hi;
    }
    Err(Error::NotFound { lo: 0.0, hi: f_max })
}
