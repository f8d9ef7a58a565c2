//! Initial states for stepping and continuation.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use oscillon::continuation::project_snapshots;
use oscillon::etd::Integrator;
use oscillon::field::ComplexField;
use oscillon::floquet::mathieu_critical;
use oscillon::model::flat_states;
use oscillon::reduction::{strong_ac_coeffs, strong_sech_pde, weak_sech_fcgl, weak_sech_pde, SechProfile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::config::Config;
use crate::io::{read_snapshot, Snapshot};
use crate::CliError;

/// Snapshots per period when a plain field seeds a harmonic solve.
const PROJECTION_SNAPSHOTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    Zero,
    Flat,
    SechWeak,
    SechStrong,
    File(PathBuf),
}

impl SeedSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s.trim() {
            "zero" => SeedSpec::Zero,
            "flat" => SeedSpec::Flat,
            "sech-weak" => SeedSpec::SechWeak,
            "sech-strong" => SeedSpec::SechStrong,
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => SeedSpec::File(PathBuf::from(p)),
                _ => {
                    return Err(CliError::Config(format!(
                        "unknown seed `{other}` (zero | flat | sech-weak | sech-strong | file:PATH)"
                    )))
                }
            },
        })
    }
}

fn finish(cfg: &Config, mut f: ComplexField, rng: &mut StdRng) -> ComplexField {
    let gain = cfg.run.seed_gain;
    let noise = cfg.run.noise;
    for v in f.values_mut() {
        *v *= gain;
        if noise > 0.0 {
            *v += noise * Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    f
}

fn file_field(cfg: &Config, path: &Path) -> Result<Snapshot, CliError> {
    let snap = read_snapshot(path)?;
    let n = match &snap {
        Snapshot::Field(f) => f.len(),
        Snapshot::Harmonics(h) => h.first().map(|(_, f)| f.len()).unwrap_or(0),
    };
    if n != cfg.grid.n {
        return Err(CliError::Config(format!("seed file has {n} points but grid.n = {}", cfg.grid.n)));
    }
    Ok(snap)
}

/// Amplitude-equation field at `Gamma = fcgl.gamma`, centred at `L/2`.
pub fn fcgl_seed(cfg: &Config, spec: &SeedSpec) -> Result<ComplexField, CliError> {
    let (n, l) = (cfg.grid.n, cfg.length());
    let p = cfg.fcgl_params();
    let mut rng = StdRng::seed_from_u64(cfg.run.rng_seed);
    let f = match spec {
        SeedSpec::Zero => ComplexField::zeros(n, l)?,
        SeedSpec::Flat => {
            let set = flat_states(&p)?;
            let root = set
                .roots
                .last()
                .ok_or_else(|| oscillon::Error::Existence(format!("no flat state at Gamma = {}", p.gamma)))?;
            ComplexField::constant(n, l, root.amplitude())?
        }
        SeedSpec::SechWeak => weak_sech_fcgl(&p, p.gamma)?.with_center(0.5 * l).field(n, l, 0.0)?,
        SeedSpec::SechStrong => {
            return Err(CliError::Config("sech-strong seeds only apply to the PDE".into()));
        }
        SeedSpec::File(path) => match file_field(cfg, path)? {
            Snapshot::Field(f) => f,
            Snapshot::Harmonics(_) => return Err(CliError::Config("harmonic snapshot cannot seed the amplitude equation".into())),
        },
    };
    Ok(finish(cfg, f, &mut rng))
}

/// Sech profile of the PDE at the configured forcing, centred at `L/2`.
fn pde_profile(cfg: &Config, spec: &SeedSpec) -> Result<Option<SechProfile>, CliError> {
    let p = cfg.model_params();
    let l = cfg.length();
    Ok(match spec {
        SeedSpec::SechWeak => Some(weak_sech_pde(&p, &cfg.scaling())?.with_center(0.5 * l)),
        SeedSpec::SechStrong => {
            let fp = mathieu_critical(&p, cfg.floquet.order)?;
            let coeffs = strong_ac_coeffs(&fp, &p)?;
            Some(strong_sech_pde(&coeffs, &fp, p.forcing)?.with_center(0.5 * l))
        }
        _ => None,
    })
}

/// Uniform `eps A+ e^{i pi/4}` from the amplitude-equation flat state.
fn pde_flat_amplitude(cfg: &Config) -> Result<Complex64, CliError> {
    let s = cfg.scaling();
    let fp = s.to_fcgl(&cfg.model_params());
    let set = flat_states(&fp)?;
    let root =
        set.roots.last().ok_or_else(|| oscillon::Error::Existence(format!("no flat state at Gamma = {}", fp.gamma)))?;
    Ok(s.epsilon * root.amplitude() * Complex64::from_polar(1.0, FRAC_PI_4))
}

/// PDE field at `t = 0`.
pub fn pde_field_seed(cfg: &Config, spec: &SeedSpec) -> Result<ComplexField, CliError> {
    let (n, l) = (cfg.grid.n, cfg.length());
    let mut rng = StdRng::seed_from_u64(cfg.run.rng_seed);
    let f = match spec {
        SeedSpec::Zero => ComplexField::zeros(n, l)?,
        SeedSpec::Flat => ComplexField::constant(n, l, pde_flat_amplitude(cfg)?)?,
        SeedSpec::SechWeak | SeedSpec::SechStrong => pde_profile(cfg, spec)?.expect("sech seed").field(n, l, 0.0)?,
        SeedSpec::File(path) => match file_field(cfg, path)? {
            Snapshot::Field(f) => f,
            Snapshot::Harmonics(h) => {
                let mut sum = ComplexField::zeros(n, h[0].1.length())?;
                for (_, f) in &h {
                    for (s, v) in sum.values_mut().iter_mut().zip(f.values()) {
                        *s += v;
                    }
                }
                sum
            }
        },
    };
    Ok(finish(cfg, f, &mut rng))
}

/// Harmonic profiles `U_j` for the retained set.
pub fn pde_harmonic_seed(cfg: &Config, spec: &SeedSpec, harmonics: &[i64]) -> Result<Vec<(i64, ComplexField)>, CliError> {
    let (n, l) = (cfg.grid.n, cfg.length());
    let mut rng = StdRng::seed_from_u64(cfg.run.rng_seed);
    let raw: Vec<(i64, ComplexField)> = match spec {
        SeedSpec::Zero => Vec::new(),
        SeedSpec::Flat => vec![(1, ComplexField::constant(n, l, pde_flat_amplitude(cfg)?)?)],
        SeedSpec::SechWeak | SeedSpec::SechStrong => {
            let prof = pde_profile(cfg, spec)?.expect("sech seed");
            harmonics.iter().map(|&j| Ok((j, prof.harmonic_field(n, l, j)?))).collect::<oscillon::Result<_>>()?
        }
        SeedSpec::File(path) => match file_field(cfg, path)? {
            Snapshot::Harmonics(h) => {
                if let Some((j, _)) = h.iter().find(|(j, _)| !harmonics.contains(j)) {
                    return Err(CliError::Config(format!("seed harmonic {j} is not in the retained set {harmonics:?}")));
                }
                h
            }
            Snapshot::Field(f) => snapshots_to_harmonics(cfg, &f, harmonics)?,
        },
    };
    Ok(raw.into_iter().map(|(j, f)| (j, finish(cfg, f, &mut rng))).collect())
}

/// Steps one forcing period from `u0` and fits the harmonics to evenly
/// spaced snapshots.
fn snapshots_to_harmonics(cfg: &Config, u0: &ComplexField, harmonics: &[i64]) -> Result<Vec<(i64, ComplexField)>, CliError> {
    let period = 2.0 * PI;
    let per = (period / cfg.time.dt).round().max(PROJECTION_SNAPSHOTS as f64) as u64;
    let mut it = Integrator::new(cfg.model_params(), u0, 0.0, period / per as f64)?;
    let mut snaps = Vec::with_capacity(PROJECTION_SNAPSHOTS);
    let mut done = 0u64;
    for k in 0..PROJECTION_SNAPSHOTS as u64 {
        let target = (k * per) / PROJECTION_SNAPSHOTS as u64;
        it.run_steps(target - done)?;
        done = target;
        snaps.push((it.time(), it.state()));
    }
    Ok(project_snapshots(&snaps, harmonics)?)
}
