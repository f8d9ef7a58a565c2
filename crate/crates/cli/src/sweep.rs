//! Coarse `(nu, Gamma)` / `(nu, F)` map of time-stepping outcomes from a sech seed.

use std::path::Path;

use num_complex::Complex64;
use oscillon::etd::{Integrator, SemilinearSystem};
use oscillon::field::ComplexField;
use oscillon::floquet::TrigSeries;
use oscillon::model::solution_norm;
use oscillon::reduction::{weak_sech_fcgl, weak_sech_pde, SechProfile};
use rayon::prelude::*;

use crate::config::{Config, System};
use crate::io::{num, write_csv};
use crate::{CliError, Status};

/// Final over initial norm below which the seed counts as decayed.
const DECAY_RATIO: f64 = 1e-3;
/// Edge-to-peak ratio above which the state counts as extended.
const EXTENDED_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Decayed,
    Localized,
    Flat,
    Indeterminate,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Decayed => "decayed",
            Outcome::Localized => "localized",
            Outcome::Flat => "flat",
            Outcome::Indeterminate => "indeterminate",
        }
    }
}

/// Largest `|u|` over the quarter of the domain farthest from the centre,
/// relative to the peak.
pub fn edge_ratio(u: &ComplexField) -> f64 {
    let n = u.len();
    let peak = u.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let edge = u
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < n / 8 || *i >= n - n / 8)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    edge / peak
}

pub fn classify(initial: &ComplexField, last: &ComplexField) -> Outcome {
    let n0 = solution_norm(initial);
    let n1 = solution_norm(last);
    if !n1.is_finite() {
        Outcome::Indeterminate
    } else if n1 < DECAY_RATIO * n0.max(f64::MIN_POSITIVE) {
        Outcome::Decayed
    } else if edge_ratio(last) > EXTENDED_RATIO {
        Outcome::Flat
    } else {
        Outcome::Localized
    }
}

fn generic_pulse(amp: f64, inv_width: f64, envelope: TrigSeries) -> SechProfile {
    SechProfile { amp, inv_width, center: 0.0, envelope }
}

fn probe<S: SemilinearSystem>(system: S, seed: ComplexField, cfg: &Config) -> Result<(Outcome, f64, f64), CliError> {
    let mut it = Integrator::new(system, &seed, 0.0, cfg.time.dt)?;
    let last = match it.evolve(cfg.sweep.t_end, u64::MAX, |_| {}) {
        Ok(u) => u,
        Err(oscillon::Error::BlowUp { .. }) => return Ok((Outcome::Indeterminate, f64::INFINITY, f64::NAN)),
        Err(e) => return Err(e.into()),
    };
    Ok((classify(&seed, &last), solution_norm(&last), edge_ratio(&last)))
}

/// One grid point. Outside the weak pulse's existence range a unit-size
/// pulse is used instead.
fn run_point(cfg: &Config, nu: f64, param: f64) -> Result<(Outcome, f64, f64), CliError> {
    let (n, l) = (cfg.grid.n, cfg.length());
    let gain = cfg.run.seed_gain;
    let scale = |mut f: ComplexField| {
        f.values_mut().iter_mut().for_each(|v| *v *= gain);
        f
    };
    match cfg.run.system {
        System::Fcgl => {
            let mut p = cfg.fcgl_params();
            p.nu = nu;
            p.gamma = param;
            let prof = weak_sech_fcgl(&p, param)
                .unwrap_or_else(|_| generic_pulse(1.0, 1.0, TrigSeries::from_coeffs(0, |_| Complex64::new(1.0, 0.0))));
            let seed = scale(prof.with_center(0.5 * l).field(n, l, 0.0)?);
            probe(p, seed, cfg)
        }
        System::Pde => {
            let s = cfg.scaling();
            let mut p = cfg.model_params();
            p.omega = 1.0 + s.epsilon * s.epsilon * nu;
            p.forcing = param;
            let eps = s.epsilon;
            let prof = weak_sech_pde(&p, &s).unwrap_or_else(|_| {
                let c = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
                generic_pulse(eps, eps, TrigSeries::from_coeffs(1, |j| if j == 1 { c } else { Complex64::new(0.0, 0.0) }))
            });
            let seed = scale(prof.with_center(0.5 * l).field(n, l, 0.0)?);
            probe(p, seed, cfg)
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn worker_count() -> Result<Option<usize>, CliError> {
    match std::env::var("OSCILLON_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("OSCILLON_THREADS = `{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

pub fn sweep(cfg: &Config, out: &Path) -> Result<Status, CliError> {
    let s = &cfg.sweep;
    let grid: Vec<(f64, f64)> = linspace(s.nu_min, s.nu_max, s.nu_steps)
        .into_iter()
        .flat_map(|nu| linspace(s.param_min, s.param_max, s.param_steps).into_iter().map(move |p| (nu, p)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<_> = pool.install(|| grid.par_iter().map(|&(nu, p)| run_point(cfg, nu, p)).collect());
    let mut rows = Vec::with_capacity(grid.len());
    let mut failures = 0;
    for (&(nu, p), r) in grid.iter().zip(results) {
        let (outcome, norm, edge) = r.unwrap_or_else(|e| {
            eprintln!("warning: sweep point (nu {nu}, parameter {p}) failed: {e}");
            failures += 1;
            (Outcome::Indeterminate, f64::NAN, f64::NAN)
        });
        rows.push(vec![num(nu), num(p), outcome.label().to_string(), num(norm), num(edge)]);
    }
    write_csv(&out.join("sweep.csv"), &["nu", "parameter", "outcome", "final_norm", "edge_ratio"], &rows)?;
    println!("{} points, {failures} failed", grid.len());
    Ok(Status::Done)
}
