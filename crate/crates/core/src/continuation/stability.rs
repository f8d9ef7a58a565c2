//! Stability of converged states.
//!
//! Steady amplitude-equation states: eigenvalues of the real linearisation on
//! even and odd perturbations. Time-periodic PDE states: growth of a small
//! perturbation under time stepping, measured stroboscopically.

use std::f64::consts::PI;

use ndarray_linalg::EigVals;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::fcgl::SteadyFcgl;
use super::harmonic::HarmonicPde;
use crate::error::Result;
use crate::etd::Integrator;
use crate::floquet::linalg_err;
use crate::model::solution_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// The eigenvalue computation failed.
    Indeterminate,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Indeterminate => "indeterminate",
        }
    }
}

/// Threshold on the leading growth rate of amplitude-equation states. The
/// translation mode sits at zero up to rounding.
pub const FCGL_GROWTH_TOL: f64 = 1e-8;

/// Largest real part of the spectrum of the linearisation about `x`.
pub fn fcgl_leading_eigenvalue(problem: &SteadyFcgl, x: &[f64], gamma: f64) -> Result<f64> {
    let mut lead = f64::NEG_INFINITY;
    for odd in [false, true] {
        let vals = problem.linearization(x, gamma, odd).eigvals().map_err(linalg_err)?;
        lead = vals.iter().map(|v: &Complex64| v.re).fold(lead, f64::max);
    }
    Ok(lead)
}

pub fn classify_fcgl(problem: &SteadyFcgl, x: &[f64], gamma: f64) -> Stability {
    match fcgl_leading_eigenvalue(problem, x, gamma) {
        Ok(v) if v < FCGL_GROWTH_TOL => Stability::Stable,
        Ok(v) if v.is_finite() => Stability::Unstable,
        _ => Stability::Indeterminate,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PdeStabilitySettings {
    pub periods: usize,
    pub steps_per_period: usize,
    /// Relative amplitude of the random perturbation.
    pub perturbation: f64,
    /// Leading periods excluded from the growth fit.
    pub transient_periods: usize,
    pub rate_threshold: f64,
    pub seed: u64,
}

impl Default for PdeStabilitySettings {
    fn default() -> Self {
        Self {
            periods: 40,
            steps_per_period: 200,
            perturbation: 1e-6,
            transient_periods: 10,
            rate_threshold: 1e-4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PdeStabilityReport {
    pub rate: f64,
    pub stability: Stability,
    /// Norm of the perturbed-minus-baseline difference after each period.
    pub deviations: Vec<f64>,
}

/// Least-squares slope of `ln d_k` against `t_k`.
fn log_slope(t: &[f64], d: &[f64]) -> f64 {
    let y: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    sxy / sxx
}

/// Evolves the reconstructed state and a randomly perturbed copy side by side
/// and fits the growth rate of their stroboscopic separation.
pub fn classify_pde(problem: &HarmonicPde, x: &[f64], forcing: f64, settings: &PdeStabilitySettings) -> Result<PdeStabilityReport> {
    let params = problem.params().with_forcing(forcing);
    let base = problem.reconstruct(x, 0.0);
    let size = base.max_abs();
    let scale = settings.perturbation * if size > 0.0 { size } else { 1.0 };
    let mut rng = StdRng::seed_from_u64(settings.seed);
    let mut pert = base.clone();
    for v in pert.values_mut() {
        *v += scale * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let dt = 2.0 * PI / settings.steps_per_period as f64;
    let mut a = Integrator::new(params, &base, 0.0, dt)?;
    let mut b = Integrator::new(params, &pert, 0.0, dt)?;
    let mut deviations = Vec::with_capacity(settings.periods);
    for _ in 0..settings.periods {
        a.run_steps(settings.steps_per_period as u64)?;
        b.run_steps(settings.steps_per_period as u64)?;
        deviations.push(solution_norm(&b.state().sub(&a.state())?).max(f64::MIN_POSITIVE));
    }
    let skip = settings.transient_periods.min(settings.periods.saturating_sub(2));
    let t: Vec<f64> = (skip..settings.periods).map(|k| 2.0 * PI * (k + 1) as f64).collect();
    let rate = log_slope(&t, &deviations[skip..]);
    let stability = if !rate.is_finite() {
        Stability::Indeterminate
    } else if rate < settings.rate_threshold {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    Ok(PdeStabilityReport { rate, stability, deviations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::harmonic::DEFAULT_HARMONICS;
    use crate::continuation::SteadyProblem;
    use crate::model::{FcglParams, ModelParams};

    fn fcgl() -> FcglParams {
        FcglParams { mu: -0.5, nu: 2.0, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, gamma: 0.0 }
    }

    #[test]
    fn zero_state_changes_stability_at_onset() {
        let prob = SteadyFcgl::new(fcgl(), 32, 20.0 * PI).unwrap();
        let x = vec![0.0; 32];
        let g0 = fcgl().gamma0();
        assert_eq!(classify_fcgl(&prob, &x, 1.5), Stability::Stable);
        assert_eq!(classify_fcgl(&prob, &x, 2.2), Stability::Unstable);
        // Closed form at k = 0: mu + sqrt(Gamma^2 - nu^2).
        let lead = fcgl_leading_eigenvalue(&prob, &x, 2.2).unwrap();
        assert!((lead - (-0.5 + (2.2f64 * 2.2 - 4.0).sqrt())).abs() < 1e-12);
        let below = fcgl_leading_eigenvalue(&prob, &x, g0 * (1.0 - 1e-4)).unwrap();
        let above = fcgl_leading_eigenvalue(&prob, &x, g0 * (1.0 + 1e-4)).unwrap();
        assert!(below < 0.0 && above > 0.0);
    }

    #[test]
    fn slope_fit_recovers_exponential() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let d: Vec<f64> = t.iter().map(|v| 3.0 * (-0.2 * v).exp()).collect();
        assert!((log_slope(&t, &d) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn pde_zero_state_below_onset_is_stable() {
        let p = ModelParams { mu: -0.005, omega: 1.02, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, forcing: 0.0 };
        let prob = HarmonicPde::new(p, 16, 20.0, &DEFAULT_HARMONICS).unwrap();
        let x = vec![0.0; prob.dim()];
        let settings = PdeStabilitySettings { periods: 30, transient_periods: 15, ..Default::default() };
        let below = classify_pde(&prob, &x, 0.06, &settings).unwrap();
        assert_eq!(below.stability, Stability::Stable, "{}", below.rate);
        let above = classify_pde(&prob, &x, 0.12, &settings).unwrap();
        assert_eq!(above.stability, Stability::Unstable, "{}", above.rate);
    }
}
