//! Run configuration: TOML key-value sections, `--override` patches and
//! resolution of derived values.

use std::f64::consts::PI;
use std::path::Path;

use oscillon::model::{FcglParams, ModelParams, ScalingMap};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Pde,
    Fcgl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Both,
    Up,
    Down,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub system: System,
    /// zero | flat | sech-weak | sech-strong | file:PATH
    pub seed: String,
    pub rng_seed: u64,
    /// Absolute amplitude of seeded random noise added to the seed field.
    pub noise: f64,
    /// Multiplies the seed field (sech seeds sit on the unstable branch).
    pub seed_gain: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { system: System::Fcgl, seed: "sech-weak".into(), rng_seed: 1, noise: 0.0, seed_gain: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcglSection {
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_re: f64,
    pub c_im: f64,
    pub gamma: f64,
}

impl Default for FcglSection {
    fn default() -> Self {
        Self { mu: -0.5, nu: 2.0, alpha: 1.0, beta: -2.0, c_re: -1.0, c_im: -2.5, gamma: 1.45 }
    }
}

impl FcglSection {
    pub fn params(&self) -> FcglParams {
        FcglParams {
            mu: self.mu,
            nu: self.nu,
            alpha: self.alpha,
            beta: self.beta,
            c_re: self.c_re,
            c_im: self.c_im,
            gamma: self.gamma,
        }
    }
}

/// Missing PDE parameters are derived from `[fcgl]` through the scaling map.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub c_re: Option<f64>,
    pub c_im: Option<f64>,
    pub forcing: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub epsilon: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self { epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    /// Defaults to 20 pi for the amplitude equation and 20 pi / epsilon for the PDE.
    pub length: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 256, length: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between norm samples and snapshots.
    pub stride: u64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: 2.0 * PI / 200.0, t_end: 40.0 * PI, stride: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSection {
    /// Step sizes are measured in amplitude-equation units for both systems.
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_points: usize,
    pub param_min: f64,
    pub param_max: f64,
    pub norm_max: f64,
    pub direction: Direction,
    pub harmonics: Vec<i64>,
    pub stability: bool,
    /// Write a state snapshot every this many points (0: folds and ends only).
    pub snapshot_stride: usize,
}

impl Default for ContinuationSection {
    fn default() -> Self {
        Self {
            ds: 0.01,
            ds_min: 1e-5,
            ds_max: 0.1,
            max_points: 400,
            param_min: 0.0,
            param_max: f64::INFINITY,
            norm_max: f64::INFINITY,
            direction: Direction::Both,
            harmonics: vec![-3, -1, 1, 3],
            stability: true,
            snapshot_stride: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetSection {
    pub order: usize,
    /// Rows of the one-period eigenfunction table.
    pub samples: usize,
}

impl Default for FloquetSection {
    fn default() -> Self {
        Self { order: oscillon::floquet::DEFAULT_HILL_ORDER, samples: 128 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceSection {
    pub regime: Regime,
}

impl Default for ReduceSection {
    fn default() -> Self {
        Self { regime: Regime::Weak }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_steps: usize,
    /// Gamma (amplitude equation) or F (PDE).
    pub param_min: f64,
    pub param_max: f64,
    pub param_steps: usize,
    pub t_end: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { nu_min: 0.0, nu_max: 3.0, nu_steps: 7, param_min: 1.0, param_max: 2.5, param_steps: 16, t_end: 200.0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub fcgl: FcglSection,
    pub pde: PdeSection,
    pub scaling: ScalingSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub continuation: ContinuationSection,
    pub floquet: FloquetSection,
    pub reduce: ReduceSection,
    pub sweep: SweepSection,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `KEY=VALUE` with `KEY` as `section.field`. The value is read as a
/// TOML value, falling back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| config_err(format!("override `{spec}` is not KEY=VALUE")))?;
    let (section, field) =
        key.trim().split_once('.').ok_or_else(|| config_err(format!("override key `{key}` is not section.field")))?;
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let sect = entry.as_table_mut().ok_or_else(|| config_err(format!("`{section}` is not a section")))?;
    sect.insert(field.to_string(), value);
    Ok(())
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Config = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(config_err(what.to_string())) };
        check(self.scaling.epsilon > 0.0, "scaling.epsilon must be positive")?;
        check(self.grid.n >= 8 && self.grid.n.is_multiple_of(2), "grid.n must be an even number >= 8")?;
        check(self.grid.length.is_none_or(|l| l > 0.0), "grid.length must be positive")?;
        check(self.time.dt > 0.0, "time.dt must be positive")?;
        check(self.time.t_end > 0.0, "time.t_end must be positive")?;
        check(self.time.stride >= 1, "time.stride must be >= 1")?;
        check(self.run.noise >= 0.0, "run.noise must be non-negative")?;
        let c = &self.continuation;
        check(c.ds_min > 0.0 && c.ds_min <= c.ds && c.ds <= c.ds_max, "continuation needs 0 < ds_min <= ds <= ds_max")?;
        check(c.param_min < c.param_max, "continuation.param_min must be below param_max")?;
        check(c.max_points >= 2, "continuation.max_points must be >= 2")?;
        check(self.floquet.order >= 1, "floquet.order must be >= 1")?;
        check(self.floquet.samples >= 2, "floquet.samples must be >= 2")?;
        let s = &self.sweep;
        check(s.nu_steps >= 1 && s.param_steps >= 1, "sweep steps must be >= 1")?;
        check(s.nu_min <= s.nu_max && s.param_min <= s.param_max, "sweep ranges must be ordered")?;
        check(s.t_end > 0.0, "sweep.t_end must be positive")?;
        self.fcgl_params().validate().map_err(|e| config_err(format!("[fcgl] {e}")))?;
        self.model_params().validate().map_err(|e| config_err(format!("[pde] {e}")))?;
        Ok(())
    }

    pub fn scaling(&self) -> ScalingMap {
        ScalingMap::new(self.scaling.epsilon).expect("validated epsilon")
    }

    pub fn fcgl_params(&self) -> FcglParams {
        self.fcgl.params()
    }

    pub fn model_params(&self) -> ModelParams {
        let d = self.scaling().to_model(&self.fcgl_params());
        let p = &self.pde;
        ModelParams {
            mu: p.mu.unwrap_or(d.mu),
            omega: p.omega.unwrap_or(d.omega),
            alpha: p.alpha.unwrap_or(d.alpha),
            beta: p.beta.unwrap_or(d.beta),
            c_re: p.c_re.unwrap_or(d.c_re),
            c_im: p.c_im.unwrap_or(d.c_im),
            forcing: p.forcing.unwrap_or(d.forcing),
        }
    }

    pub fn length(&self) -> f64 {
        self.grid.length.unwrap_or(match self.run.system {
            System::Fcgl => 20.0 * PI,
            System::Pde => 20.0 * PI / self.scaling.epsilon,
        })
    }

    /// Copy with every derived value filled in, for the manifest.
    pub fn resolved(&self) -> Config {
        let mut c = self.clone();
        let m = self.model_params();
        c.pde = PdeSection {
            mu: Some(m.mu),
            omega: Some(m.omega),
            alpha: Some(m.alpha),
            beta: Some(m.beta),
            c_re: Some(m.c_re),
            c_im: Some(m.c_im),
            forcing: Some(m.forcing),
        };
        c.grid.length = Some(self.length());
        c
    }
}
