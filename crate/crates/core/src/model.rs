//! The forced model PDE, its forced complex Ginzburg–Landau amplitude
//! equation, and the algebra of uniform ("flat") states.
//!
//! Model PDE:
//! `U_t = (mu + i omega) U + (alpha + i beta) U_xx + C |U|^2 U + i Re(U) F cos(2t)`.
//!
//! Amplitude equation:
//! `A_T = (mu + i nu) A + (alpha + i beta) A_XX + C |A|^2 A + Gamma conj(A)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::spectral::SpectralEngine;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_re: f64,
    pub c_im: f64,
    /// Amplitude `F` of the `cos(2t)` drive.
    pub forcing: f64,
}

impl ModelParams {
    pub fn cubic(&self) -> Complex64 {
        Complex64::new(self.c_re, self.c_im)
    }

    pub fn with_forcing(mut self, forcing: f64) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.omega, self.alpha, self.beta, self.c_re, self.c_im, self.forcing];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("model parameters must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Parameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.forcing < 0.0 {
            return Err(Error::Parameter(format!("forcing must be non-negative, got {}", self.forcing)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcglParams {
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub gamma: f64,
}

impl FcglParams {
    pub fn cubic(&self) -> Complex64 {
        Complex64::new(self.c_re, self.c_im)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Primary (pitchfork) onset `Gamma_0 = sqrt(mu^2 + nu^2)`.
    pub fn gamma0(&self) -> f64 {
        self.mu.hypot(self.nu)
    }

    /// `mu C_r + nu C_i`; negative means the primary bifurcation is subcritical.
    pub fn criticality(&self) -> f64 {
        self.mu * self.c_re + self.nu * self.c_im
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.nu, self.alpha, self.beta, self.c_re, self.c_im, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("amplitude-equation parameters must be finite".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::Parameter(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Weak-damping scaling between the two systems:
/// `mu_pde = eps^2 mu`, `omega = 1 + eps^2 nu`, `F = 4 eps^2 Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingMap {
    pub epsilon: f64,
}

impl ScalingMap {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    fn eps2(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    pub fn to_model(&self, p: &FcglParams) -> ModelParams {
        let e2 = self.eps2();
        ModelParams {
            mu: e2 * p.mu,
            omega: 1.0 + e2 * p.nu,
            alpha: p.alpha,
            beta: p.beta,
            c_re: p.c_re,
            c_im: p.c_im,
            forcing: 4.0 * e2 * p.gamma,
        }
    }

    pub fn to_fcgl(&self, p: &ModelParams) -> FcglParams {
        let e2 = self.eps2();
        FcglParams {
            mu: p.mu / e2,
            nu: (p.omega - 1.0) / e2,
            alpha: p.alpha,
            beta: p.beta,
            c_re: p.c_re,
            c_im: p.c_im,
            gamma: p.forcing / (4.0 * e2),
        }
    }

    pub fn forcing_to_gamma(&self, forcing: f64) -> f64 {
        forcing / (4.0 * self.eps2())
    }

    pub fn gamma_to_forcing(&self, gamma: f64) -> f64 {
        4.0 * self.eps2() * gamma
    }
}

pub fn map_params(p: &FcglParams, s: &ScalingMap) -> ModelParams {
    s.to_model(p)
}

pub fn unmap_params(p: &ModelParams, s: &ScalingMap) -> FcglParams {
    s.to_fcgl(p)
}

fn check_engine(engine: &SpectralEngine, state: &ComplexField) -> Result<()> {
    if engine.n() != state.len() {
        return Err(Error::Shape { expected: engine.n(), got: state.len() });
    }
    state.ensure_finite()
}

/// Right-hand side of the model PDE at time `t`.
pub fn pde_rhs(engine: &SpectralEngine, state: &ComplexField, t: f64, p: &ModelParams) -> Result<ComplexField> {
    check_engine(engine, state)?;
    let lin = Complex64::new(p.mu, p.omega);
    let diff = Complex64::new(p.alpha, p.beta);
    let uxx = engine.second_derivative(state)?;
    let cubic = engine.cubic_term(state, p.c_re, p.c_im)?;
    let drive = p.forcing * (2.0 * t).cos();
    let values = state
        .values()
        .iter()
        .zip(uxx.values())
        .zip(cubic.values())
        .map(|((&u, &uxx), &nl)| lin * u + diff * uxx + nl + Complex64::new(0.0, u.re * drive))
        .collect();
    ComplexField::new(state.length(), values)
}

/// Right-hand side of the forced complex Ginzburg–Landau equation.
pub fn fcgl_rhs(engine: &SpectralEngine, state: &ComplexField, p: &FcglParams) -> Result<ComplexField> {
    check_engine(engine, state)?;
    let lin = Complex64::new(p.mu, p.nu);
    let diff = Complex64::new(p.alpha, p.beta);
    let axx = engine.second_derivative(state)?;
    let cubic = engine.cubic_term(state, p.c_re, p.c_im)?;
    let values = state
        .values()
        .iter()
        .zip(axx.values())
        .zip(cubic.values())
        .map(|((&a, &axx), &nl)| lin * a + diff * axx + nl + p.gamma * a.conj())
        .collect();
    ComplexField::new(state.length(), values)
}

/// Bifurcation-diagram norm `N = sqrt((2/L) int_0^L |U|^2 dx)`.
///
/// The rectangle rule is exact for band-limited periodic data.
pub fn solution_norm(state: &ComplexField) -> f64 {
    let mean: f64 = state.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / state.len() as f64;
    (2.0 * mean).sqrt()
}

/// A uniform steady state `A = R e^{i phi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatRoot {
    pub r2: f64,
    pub r: f64,
    pub phi: f64,
}

impl FlatRoot {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatStateSet {
    /// Admissible roots, ordered by increasing `R`.
    pub roots: Vec<FlatRoot>,
    pub gamma0: f64,
    /// Saddle-node of the flat branch; present only when the onset is subcritical.
    pub gamma_d: Option<f64>,
}

const ROOT_TOL: f64 = 1e-12;

/// Uniform steady states from the quadratic in `R^2`
/// `|C|^2 R^4 + 2 (mu C_r + nu C_i) R^2 + mu^2 + nu^2 - Gamma^2 = 0`.
pub fn flat_states(p: &FcglParams) -> Result<FlatStateSet> {
    p.validate()?;
    let c = p.cubic();
    let a = c.norm_sqr();
    if a == 0.0 {
        return Err(Error::Parameter("flat states need a non-zero cubic coefficient".into()));
    }
    let crit = p.criticality();
    let b = 2.0 * crit;
    let c0 = p.mu * p.mu + p.nu * p.nu - p.gamma * p.gamma;
    let gamma0 = p.gamma0();
    let gamma_d = (crit < 0.0).then(|| (p.mu * p.mu + p.nu * p.nu - crit * crit / a).max(0.0).sqrt());

    let scale = b * b + (4.0 * a * c0).abs();
    let mut disc = b * b - 4.0 * a * c0;
    let mut candidates = Vec::new();
    if disc < 0.0 && disc > -ROOT_TOL * scale.max(1.0) {
        disc = 0.0;
    }
    if disc >= 0.0 {
        if c0 == 0.0 {
            // Gamma == Gamma_0: the bifurcating root is R = 0.
            candidates.push(0.0);
            candidates.push(-b / a);
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            if q == 0.0 {
                candidates.push(0.0);
            } else {
                candidates.push(q / a);
                candidates.push(c0 / q);
            }
        }
    }

    let lin = Complex64::new(p.mu, p.nu);
    let mut roots: Vec<FlatRoot> = Vec::new();
    for r2 in candidates {
        if r2 < -ROOT_TOL {
            continue;
        }
        let r2 = r2.max(0.0);
        let phi = if p.gamma > 0.0 {
            let w = -(lin + c * r2) / p.gamma;
            -0.5 * w.im.atan2(w.re)
        } else {
            0.0
        };
        let root = FlatRoot { r2, r: r2.sqrt(), phi };
        if !roots.iter().any(|o| (o.r2 - root.r2).abs() <= ROOT_TOL * (1.0 + root.r2)) {
            roots.push(root);
        }
    }
    roots.sort_by(|x, y| x.r.total_cmp(&y.r));
    Ok(FlatStateSet { roots, gamma0, gamma_d })
}

/// Relative residual of a root in the quartic.
pub fn quartic_residual(p: &FcglParams, r2: f64) -> f64 {
    let a = p.cubic().norm_sqr();
    let b = 2.0 * p.criticality();
    let c0 = p.mu * p.mu + p.nu * p.nu - p.gamma * p.gamma;
    let scale = (a * r2 * r2).abs() + (b * r2).abs() + (p.mu * p.mu + p.nu * p.nu) + p.gamma * p.gamma;
    (a * r2 * r2 + b * r2 + c0).abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    pub(crate) fn reference_fcgl(gamma: f64) -> FcglParams {
        FcglParams { mu: -0.5, nu: 2.0, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, gamma }
    }

    fn reference_pde(forcing: f64) -> ModelParams {
        ModelParams { mu: -0.005, omega: 1.02, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, forcing }
    }

    #[test]
    fn pde_rhs_vanishes_on_zero() {
        let eng = SpectralEngine::new(32, 10.0).unwrap();
        let z = ComplexField::zeros(32, 10.0).unwrap();
        assert_eq!(pde_rhs(&eng, &z, 1.3, &reference_pde(0.06)).unwrap().max_abs(), 0.0);
        assert_eq!(fcgl_rhs(&eng, &z, &reference_fcgl(1.5)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn pde_rhs_of_constant_when_drive_vanishes() {
        let eng = SpectralEngine::new(16, 10.0).unwrap();
        let one = ComplexField::constant(16, 10.0, Complex64::new(1.0, 0.0)).unwrap();
        let p = reference_pde(0.37);
        let out = pde_rhs(&eng, &one, PI / 4.0, &p).unwrap();
        let want = Complex64::new(p.mu, p.omega) + p.cubic();
        assert!(out.values().iter().all(|v| (v - want).norm() < 1e-12));
    }

    #[test]
    fn linear_dispersion_on_fourier_modes() {
        let l = 20.0;
        let eng = SpectralEngine::new(64, l).unwrap();
        let mut p = reference_pde(0.0);
        p.c_re = 0.0;
        p.c_im = 0.0;
        let mut q = reference_fcgl(0.0);
        q.c_re = 0.0;
        q.c_im = 0.0;
        for m in [0, 1, 3, 10] {
            let k = 2.0 * PI * m as f64 / l;
            let f = ComplexField::from_fn(64, l, |x| Complex64::from_polar(1.0, k * x)).unwrap();
            let sigma = Complex64::new(p.mu - p.alpha * k * k, p.omega - p.beta * k * k);
            let out = pde_rhs(&eng, &f, 0.3, &p).unwrap();
            for (v, u) in out.values().iter().zip(f.values()) {
                assert!((v - sigma * u).norm() < 1e-10);
            }
            let lam = Complex64::new(q.mu, q.nu) - Complex64::new(q.alpha, q.beta) * k * k;
            let out = fcgl_rhs(&eng, &f, &q).unwrap();
            for (v, u) in out.values().iter().zip(f.values()) {
                assert!((v - lam * u).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rhs_rejects_nan() {
        let eng = SpectralEngine::new(16, 1.0).unwrap();
        let mut f = ComplexField::zeros(16, 1.0).unwrap();
        f.values_mut()[2].re = f64::INFINITY;
        assert!(matches!(fcgl_rhs(&eng, &f, &reference_fcgl(1.0)), Err(Error::InvalidField(_))));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(solution_norm(&ComplexField::zeros(8, 3.0).unwrap()), 0.0);
        for l in [1.0, 17.0, 200.0 * PI] {
            let one = ComplexField::constant(64, l, Complex64::new(1.0, 0.0)).unwrap();
            assert!((solution_norm(&one) - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_of_sech_matches_closed_form() {
        // int sech^2(b x) dx = 2 / b on a long domain.
        let (a, b, l) = (0.8, 0.5, 200.0);
        let f = ComplexField::from_fn(1024, l, |x| Complex64::new(a / (b * (x - l / 2.0)).cosh(), 0.0)).unwrap();
        let want = a * (4.0 / (b * l)).sqrt();
        assert!((solution_norm(&f) - want).abs() < 1e-6 * want);
    }

    #[test]
    fn onset_and_saddle_node() {
        let s = flat_states(&reference_fcgl(1.0)).unwrap();
        assert!((s.gamma0 - 4.25f64.sqrt()).abs() < 1e-12);
        assert!((s.gamma0 - 2.0616).abs() < 5e-5);
        let gd = s.gamma_d.unwrap();
        assert!((gd - 1.2070).abs() < 5e-5);
        assert!(gd < s.gamma0);
    }

    #[test]
    fn saddle_node_is_a_double_root() {
        // Discriminant-zero oracle: at Gamma_d the two roots coincide.
        let p = reference_fcgl(0.0);
        let a = p.cubic().norm_sqr();
        let b = 2.0 * p.criticality();
        // b^2 = 4 a (mu^2 + nu^2 - G^2)
        let g = (p.mu * p.mu + p.nu * p.nu - b * b / (4.0 * a)).sqrt();
        let s = flat_states(&p.with_gamma(g)).unwrap();
        assert!((s.gamma_d.unwrap() - g).abs() < 1e-12);
        assert_eq!(s.roots.len(), 1);
        assert!(flat_states(&p.with_gamma(g - 1e-3)).unwrap().roots.is_empty());
        assert_eq!(flat_states(&p.with_gamma(g + 1e-3)).unwrap().roots.len(), 2);
    }

    #[test]
    fn flat_roots_at_reference_forcing() {
        let p = reference_fcgl(1.496);
        let s = flat_states(&p).unwrap();
        let rs: Vec<f64> = s.roots.iter().map(|r| r.r).collect();
        // 7.25 R^4 - 9 R^2 + 2.012 = 0 by the quadratic formula.
        let d = (81.0f64 - 4.0 * 7.25 * (4.25 - 1.496 * 1.496)).sqrt();
        let want = [((9.0 - d) / 14.5).sqrt(), ((9.0 + d) / 14.5).sqrt()];
        assert_eq!(rs.len(), 2);
        for (r, w) in rs.iter().zip(want) {
            assert!((r - w).abs() < 1e-12);
        }
        assert!((rs[0] - 0.5407).abs() < 1e-4 && (rs[1] - 0.9742).abs() < 1e-4);
        for root in &s.roots {
            assert!(quartic_residual(&p, root.r2) < 1e-12);
        }
    }

    #[test]
    fn flat_roots_are_steady_states_of_the_pde() {
        let eng = SpectralEngine::new(16, 20.0 * PI).unwrap();
        for g in [1.25, 1.496, 1.9, 2.3] {
            let p = reference_fcgl(g);
            for root in flat_states(&p).unwrap().roots {
                let f = ComplexField::constant(16, 20.0 * PI, root.amplitude()).unwrap();
                assert!(fcgl_rhs(&eng, &f, &p).unwrap().max_abs() < 1e-10, "gamma {g} root {root:?}");
            }
        }
    }

    #[test]
    fn onset_reports_the_bifurcating_root() {
        let p = reference_fcgl(0.0);
        let s = flat_states(&p.with_gamma(p.gamma0())).unwrap();
        assert_eq!(s.roots[0].r, 0.0);
        assert!(s.roots.len() == 2);
    }

    #[test]
    fn supercritical_has_no_saddle_node() {
        let mut p = reference_fcgl(1.0);
        p.c_re = 1.0;
        p.c_im = 2.5;
        assert!(flat_states(&p).unwrap().gamma_d.is_none());
    }

    #[test]
    fn zero_cubic_is_rejected() {
        let mut p = reference_fcgl(1.0);
        p.c_re = 0.0;
        p.c_im = 0.0;
        assert!(flat_states(&p).is_err());
    }

    #[test]
    fn scaling_examples() {
        let s = ScalingMap::new(0.1).unwrap();
        let m = s.to_model(&reference_fcgl(1.496));
        assert!((m.mu + 0.005).abs() < 1e-15);
        assert!((m.omega - 1.02).abs() < 1e-15);
        assert!((m.forcing - 0.05984).abs() < 1e-15);
        let one = ScalingMap::new(1.0).unwrap().to_model(&reference_fcgl(0.7));
        assert_eq!((one.mu, one.omega, one.forcing), (-0.5, 3.0, 2.8));
        let half = ScalingMap::new(0.5).unwrap().to_model(&reference_fcgl(1.0));
        assert_eq!((half.mu, half.omega), (-0.125, 1.5));
        assert!(ScalingMap::new(0.0).is_err());
    }

    proptest! {
        #[test]
        fn scaling_round_trip(mu in -2.0f64..0.0, nu in -3.0f64..3.0, g in 0.0f64..4.0, eps in 0.01f64..1.0) {
            let s = ScalingMap::new(eps).unwrap();
            let p = FcglParams { mu, nu, gamma: g, ..reference_fcgl(0.0) };
            let back = s.to_fcgl(&s.to_model(&p));
            prop_assert!((back.mu - mu).abs() < 1e-12 * (1.0 + mu.abs()));
            prop_assert!((back.nu - nu).abs() < 1e-10 * (1.0 + nu.abs()));
            prop_assert!((back.gamma - g).abs() < 1e-12 * (1.0 + g));
        }

        #[test]
        fn norm_invariant_under_shift_and_phase(vals in prop::collection::vec(-1.0f64..1.0, 32), shift in 0usize..16, th in 0.0f64..6.3) {
            let f = ComplexField::new(5.0, vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()).unwrap();
            let mut g = f.shifted(shift);
            g.scale(Complex64::from_polar(1.0, th));
            prop_assert!((solution_norm(&f) - solution_norm(&g)).abs() < 1e-12);
        }

        #[test]
        fn saddle_node_below_onset(mu in -2.0f64..-0.01, nu in -3.0f64..3.0, cr in -2.0f64..2.0, ci in -3.0f64..3.0) {
            let p = FcglParams { mu, nu, alpha: 1.0, beta: 0.0, c_re: cr, c_im: ci, gamma: 1.0 };
            prop_assume!(p.cubic().norm() > 1e-3);
            let s = flat_states(&p).unwrap();
            if let Some(gd) = s.gamma_d {
                prop_assert!(gd <= s.gamma0 + 1e-12);
            }
            for r in &s.roots {
                prop_assert!(r.r >= 0.0);
                prop_assert!(quartic_residual(&p, r.r2) < 1e-12);
            }
        }
    }
}
