//! Steady, reflection-symmetric solutions of the forced complex
//! Ginzburg–Landau equation, with `Gamma` as the continuation parameter.

use ndarray::Array2;
use num_complex::Complex64;

use super::basis::{add_real_block, pack, unpack, EvenBasis};
use super::{newton, NewtonReport, NewtonSettings, SteadyProblem};
use crate::error::Result;
use crate::field::ComplexField;
use crate::model::FcglParams;

#[derive(Debug, Clone)]
pub struct SteadyFcgl {
    basis: EvenBasis,
    params: FcglParams,
    symbols: Vec<Complex64>,
}

impl SteadyFcgl {
    /// `params.gamma` is ignored; the forcing is the continuation parameter.
    pub fn new(params: FcglParams, n: usize, length: f64) -> Result<Self> {
        params.validate()?;
        let basis = EvenBasis::new(n, length)?;
        let symbols = (0..basis.modes())
            .map(|m| {
                let k2 = basis.wavenumber(m).powi(2);
                Complex64::new(params.mu - params.alpha * k2, params.nu - params.beta * k2)
            })
            .collect();
        Ok(Self { basis, params, symbols })
    }

    pub fn basis(&self) -> &EvenBasis {
        &self.basis
    }

    pub fn params(&self) -> &FcglParams {
        &self.params
    }

    /// State vector of a field symmetric about `center`.
    pub fn encode(&self, field: &ComplexField, center: f64) -> Result<Vec<f64>> {
        let a = self.basis.project(field, center)?;
        let mut x = vec![0.0; self.dim()];
        pack(&a, &mut x);
        Ok(x)
    }

    /// Field of a state vector, centred at `L/2`.
    pub fn decode(&self, x: &[f64]) -> ComplexField {
        self.basis.centred_field(&unpack(x))
    }

    /// Converges a steady state from `seed` (symmetric about `center`).
    pub fn solve(&self, seed: &ComplexField, center: f64, gamma: f64, settings: NewtonSettings) -> Result<NewtonReport> {
        newton(self, &self.encode(seed, center)?, gamma, settings)
    }

    /// `|A|` at the point farthest from the centre.
    pub fn edge_amplitude(&self, x: &[f64]) -> f64 {
        self.basis.values(&unpack(x))[self.basis.n() / 2].norm()
    }

    /// Real Jacobian on even (`odd = false`) or odd perturbations about the
    /// state `x`.
    pub fn linearization(&self, x: &[f64], gamma: f64, odd: bool) -> Array2<f64> {
        let a = unpack(x);
        let c = self.params.cubic();
        let fine = self.basis.fine_values(&a);
        let g: Vec<Complex64> = fine.iter().map(|u| 2.0 * c * u.norm_sqr()).collect();
        let h: Vec<Complex64> = fine.iter().map(|u| c * u * u).collect();
        let gop = self.basis.multiplication_operator(&self.basis.fine_spectrum(&g), odd);
        let hop = self.basis.multiplication_operator(&self.basis.fine_spectrum(&h), odd);
        // conj maps the odd basis function e^{ikx} - e^{-ikx} to minus itself.
        let conj_sign = if odd { -1.0 } else { 1.0 };
        let offset = usize::from(odd);
        let m = gop.nrows();
        let mut jac = Array2::<f64>::zeros((2 * m, 2 * m));
        for r in 0..m {
            for col in 0..m {
                let mut av = gop[[r, col]];
                let mut bv = hop[[r, col]];
                if r == col {
                    av += self.symbols[r + offset];
                    bv += gamma;
                }
                add_real_block(&mut jac, 2 * r, 2 * col, av, conj_sign * bv);
            }
        }
        jac
    }
}

impl SteadyProblem for SteadyFcgl {
    fn dim(&self) -> usize {
        2 * self.basis.modes()
    }

    fn residual(&self, x: &[f64], gamma: f64) -> Vec<f64> {
        let a = unpack(x);
        let c = self.params.cubic();
        let mut fine = self.basis.fine_values(&a);
        for u in &mut fine {
            *u = c * u.norm_sqr() * *u;
        }
        let cub = self.basis.from_fine(&fine);
        let r: Vec<Complex64> =
            (0..a.len()).map(|m| self.symbols[m] * a[m] + cub[m] + gamma * a[m].conj()).collect();
        let mut out = vec![0.0; x.len()];
        pack(&r, &mut out);
        out
    }

    fn residual_size(&self, r: &[f64]) -> f64 {
        self.basis.values(&unpack(r)).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn jacobian(&self, x: &[f64], gamma: f64) -> Array2<f64> {
        self.linearization(x, gamma, false)
    }

    fn param_derivative(&self, x: &[f64], _gamma: f64) -> Vec<f64> {
        let conj: Vec<Complex64> = unpack(x).iter().map(|c| c.conj()).collect();
        let mut out = vec![0.0; x.len()];
        pack(&conj, &mut out);
        out
    }

    fn norm(&self, x: &[f64]) -> f64 {
        (2.0 * self.basis.mean_square(&unpack(x))).sqrt()
    }

    fn weights(&self) -> Vec<f64> {
        let mut w = vec![4.0; self.dim()];
        w[0] = 2.0;
        w[1] = 2.0;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fcgl_rhs, flat_states, solution_norm};
    use crate::reduction::weak_sech_fcgl;
    use crate::spectral::SpectralEngine;
    use std::f64::consts::PI;

    fn params() -> FcglParams {
        FcglParams { mu: -0.5, nu: 2.0, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, gamma: 0.0 }
    }

    fn bump(n: usize, l: f64) -> ComplexField {
        ComplexField::from_fn(n, l, |x| {
            let d = x - 0.5 * l;
            Complex64::new(0.4, 0.3) / (0.3 * d).cosh() + Complex64::new(0.05, -0.02) * (-(d * d) / 4.0).exp()
        })
        .unwrap()
    }

    #[test]
    fn residual_matches_pde_right_hand_side() {
        let (n, l) = (64, 20.0 * PI);
        let prob = SteadyFcgl::new(params(), n, l).unwrap();
        let f = bump(n, l);
        let x = prob.encode(&f, 0.5 * l).unwrap();
        let r = prob.decode(&prob.residual(&x, 1.3));
        let eng = SpectralEngine::new(n, l).unwrap();
        let want = fcgl_rhs(&eng, &prob.decode(&x), &params().with_gamma(1.3)).unwrap();
        assert!(r.sub(&want).unwrap().max_abs() < 1e-12);
        assert!((prob.norm(&x) - solution_norm(&prob.decode(&x))).abs() < 1e-13);
        let w = prob.weights();
        let wn: f64 = w.iter().zip(&x).map(|(w, v)| w * v * v).sum();
        assert!((wn.sqrt() - prob.norm(&x)).abs() < 1e-13);
    }

    fn fd_check(prob: &SteadyFcgl, x: &[f64], gamma: f64) {
        let jac = prob.jacobian(x, gamma);
        let h = 1e-6;
        for col in [0usize, 1, 5, 10, 17, 40] {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[col] += h;
            xm[col] -= h;
            let rp = prob.residual(&xp, gamma);
            let rm = prob.residual(&xm, gamma);
            for row in 0..x.len() {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!((fd - jac[[row, col]]).abs() < 1e-7, "({row},{col}) {fd} vs {}", jac[[row, col]]);
            }
        }
        let rl = prob.param_derivative(x, gamma);
        let rp = prob.residual(x, gamma + h);
        let rm = prob.residual(x, gamma - h);
        for row in 0..x.len() {
            assert!(((rp[row] - rm[row]) / (2.0 * h) - rl[row]).abs() < 1e-7);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (n, l) = (64, 20.0 * PI);
        let prob = SteadyFcgl::new(params(), n, l).unwrap();
        let x = prob.encode(&bump(n, l), 0.5 * l).unwrap();
        fd_check(&prob, &x, 1.4);
    }

    #[test]
    fn odd_linearization_matches_finite_differences() {
        let (n, l) = (32, 20.0);
        let prob = SteadyFcgl::new(params(), n, l).unwrap();
        let x = prob.encode(&bump(n, l), 0.5 * l).unwrap();
        let gamma = 1.2;
        let jac = prob.linearization(&x, gamma, true);
        let eng = SpectralEngine::new(n, l).unwrap();
        let base = prob.decode(&x);
        let p = params().with_gamma(gamma);
        let f0 = fcgl_rhs(&eng, &base, &p).unwrap();
        // Odd perturbation about the centre L/2: 2i b sin(k (x - L/2)).
        let (m, b) = (3usize, Complex64::new(0.3, -0.7));
        let k = 2.0 * PI * m as f64 / l;
        let h = 1e-7;
        let pert = ComplexField::from_fn(n, l, |x| 2.0 * Complex64::new(0.0, 1.0) * b * (k * (x - 0.5 * l)).sin()).unwrap();
        let mut moved = base.clone();
        for (v, d) in moved.values_mut().iter_mut().zip(pert.values()) {
            *v += h * d;
        }
        let f1 = fcgl_rhs(&eng, &moved, &p).unwrap();
        let diff: Vec<Complex64> = f1.values().iter().zip(f0.values()).map(|(a, c)| (a - c) / h).collect();
        // Read off the odd coefficients of the finite difference about L/2.
        let fd = ComplexField::new(l, diff).unwrap();
        let mut coeffs = eng.forward(fd.values());
        for (i, v) in coeffs.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, eng.wavenumbers()[i] * 0.5 * l) / n as f64;
        }
        for r in 1..n / 2 {
            let want = 0.5 * (coeffs[r] - coeffs[n - r]);
            let got = Complex64::new(
                jac[[2 * (r - 1), 2 * (m - 1)]] * b.re + jac[[2 * (r - 1), 2 * (m - 1) + 1]] * b.im,
                jac[[2 * (r - 1) + 1, 2 * (m - 1)]] * b.re + jac[[2 * (r - 1) + 1, 2 * (m - 1) + 1]] * b.im,
            );
            assert!((got - want).norm() < 1e-5, "row {r}: {got} vs {want}");
        }
    }

    #[test]
    fn converges_to_flat_state_and_zero() {
        let (n, l) = (32, 20.0 * PI);
        let prob = SteadyFcgl::new(params(), n, l).unwrap();
        let gamma = 1.6;
        let root = *flat_states(&params().with_gamma(gamma)).unwrap().roots.last().unwrap();
        let seed = ComplexField::constant(n, l, root.amplitude() * 1.05).unwrap();
        let rep = prob.solve(&seed, 0.5 * l, gamma, NewtonSettings::default()).unwrap();
        let a = prob.decode(&rep.x);
        assert!((a.values()[7] - root.amplitude()).norm() < 1e-10);
        let zero = ComplexField::zeros(n, l).unwrap();
        let rep = prob.solve(&zero, 0.5 * l, gamma, NewtonSettings::default()).unwrap();
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn localized_state_near_onset() {
        let (n, l) = (256, 20.0 * PI);
        let p = params();
        let prob = SteadyFcgl::new(p, n, l).unwrap();
        let gamma = 1.95;
        let seed = weak_sech_fcgl(&p, gamma).unwrap().with_center(0.5 * l).field(n, l, 0.0).unwrap();
        let rep = prob.solve(&seed, 0.5 * l, gamma, NewtonSettings::default()).unwrap();
        let sol = prob.decode(&rep.x);
        let peak = sol.values()[n / 2].norm();
        let seed_peak = seed.values()[n / 2].norm();
        assert!(((peak - seed_peak) / seed_peak).abs() < 0.1, "{peak} vs {seed_peak}");
        assert!(prob.basis().asymmetry(&sol, 0.5 * l).unwrap() < 1e-9);
    }
}
