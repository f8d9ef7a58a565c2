//! The `simulate`, `continue`, `floquet`, `reduce` and `flatstates` runs.

use std::f64::consts::PI;
use std::path::Path;

use oscillon::continuation::{
    classify_fcgl, classify_pde, continue_branch, Branch, ContinuationSettings, FoldKind, HarmonicPde, PdeStabilitySettings,
    SteadyFcgl, SteadyProblem, Termination,
};
use oscillon::etd::{Integrator, SemilinearSystem};
use oscillon::field::ComplexField;
use oscillon::floquet::{floquet_multipliers, mathieu_critical, weak_critical_forcing};
use oscillon::model::{flat_states, quartic_residual, FcglParams};
use oscillon::reduction::{strong_ac_coeffs, strong_sech_pde, weak_ac_coeffs, weak_phase, weak_sech_fcgl};

use crate::config::{Config, Direction, Regime, System};
use crate::io::{ensure_dir, num, write_csv, write_pairs, write_snapshot};
use crate::seed::{fcgl_seed, pde_field_seed, pde_harmonic_seed, SeedSpec};
use crate::{CliError, Status};

/// `|A|` at the domain edge above which a localized state is reported as
/// touching the boundary.
const EDGE_WARN: f64 = 1e-6;

fn pair(k: &str, v: f64) -> (String, String) {
    (k.to_string(), num(v))
}

fn text(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

// ---------------------------------------------------------------- simulate

fn step_and_record<S: SemilinearSystem>(
    mut it: Integrator<S>,
    cfg: &Config,
    out: &Path,
) -> Result<Vec<(String, String)>, CliError> {
    let snaps = out.join("snapshots");
    ensure_dir(&snaps)?;
    // Consecutive samples one forcing period apart measure stroboscopic convergence.
    let strobe = cfg.run.system == System::Pde && (cfg.time.stride as f64 * cfg.time.dt - 2.0 * PI).abs() < 1e-9;
    let mut rows = Vec::new();
    let mut io_err = None;
    let mut prev: Option<ComplexField> = None;
    let mut change = f64::NAN;
    let final_state = it.evolve(cfg.time.t_end, cfg.time.stride, |obs| {
        rows.push(vec![obs.step.to_string(), num(obs.t), num(obs.norm)]);
        let name = snaps.join(format!("snap_{:05}.dat", rows.len() - 1));
        if let Err(e) = write_snapshot(&name, &[(None, obs.state)]) {
            io_err.get_or_insert(e);
        }
        if let Some(p) = &prev {
            change = p.sub(obs.state).map(|d| oscillon::model::solution_norm(&d)).unwrap_or(f64::NAN);
        }
        prev = Some(obs.state.clone());
    })?;
    if let Some(e) = io_err {
        return Err(e);
    }
    write_csv(&out.join("norms.csv"), &["step", "t", "norm"], &rows)?;
    let norm = oscillon::model::solution_norm(&final_state);
    let mut summary = vec![pair("t_final", it.time()), pair("norm_final", norm), pair("max_abs_final", final_state.max_abs())];
    summary.push(text("steps", it.steps_taken().to_string()));
    if strobe {
        eprintln!("stroboscopic change over the last sampled period: {change:e} (norm {norm:e})");
        summary.push(pair("stroboscopic_change", change));
    }
    Ok(summary)
}

pub fn simulate(cfg: &Config, out: &Path) -> Result<Status, CliError> {
    let spec = SeedSpec::parse(&cfg.run.seed)?;
    let summary = match cfg.run.system {
        System::Fcgl => {
            let u0 = fcgl_seed(cfg, &spec)?;
            step_and_record(Integrator::new(cfg.fcgl_params(), &u0, 0.0, cfg.time.dt)?, cfg, out)?
        }
        System::Pde => {
            let u0 = pde_field_seed(cfg, &spec)?;
            step_and_record(Integrator::new(cfg.model_params(), &u0, 0.0, cfg.time.dt)?, cfg, out)?
        }
    };
    write_pairs(&out.join("summary.csv"), &summary)?;
    Ok(Status::Done)
}

// ---------------------------------------------------------------- continue

fn settings(cfg: &Config) -> ContinuationSettings {
    let c = &cfg.continuation;
    ContinuationSettings {
        ds: c.ds,
        ds_min: c.ds_min,
        ds_max: c.ds_max,
        max_points: c.max_points,
        param_min: c.param_min,
        param_max: c.param_max,
        norm_max: c.norm_max,
        ..Default::default()
    }
}

fn trace<P: SteadyProblem>(cfg: &Config, prob: &P, x0: &[f64], lambda: f64, s: &ContinuationSettings) -> Result<Branch, CliError> {
    Ok(match cfg.continuation.direction {
        Direction::Up => continue_branch(prob, x0, lambda, 1.0, s)?,
        Direction::Down => continue_branch(prob, x0, lambda, -1.0, s)?,
        Direction::Both => {
            let up = continue_branch(prob, x0, lambda, 1.0, s)?;
            let down = continue_branch(prob, x0, lambda, -1.0, s)?;
            up.merged_with(down)
        }
    })
}

fn write_branch(
    out: &Path,
    branch: &Branch,
    stride: usize,
    snapshot: impl Fn(&Path, &[f64]) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let snaps = out.join("snapshots");
    ensure_dir(&snaps)?;
    let last = branch.points.len().saturating_sub(1);
    let mut rows = Vec::new();
    for (i, p) in branch.points.iter().enumerate() {
        let fold = branch.folds.iter().find(|f| f.index == i).map(|f| match f.kind {
            FoldKind::Lower => "lower",
            FoldKind::Upper => "upper",
        });
        let keep = i == 0 || i == last || fold.is_some() || (stride > 0 && i % stride == 0);
        let name = if keep {
            let name = format!("point_{i:05}.dat");
            snapshot(&snaps.join(&name), &p.state)?;
            format!("snapshots/{name}")
        } else {
            String::new()
        };
        rows.push(vec![
            i.to_string(),
            num(p.parameter),
            num(p.norm),
            p.stability.map(|s| s.label()).unwrap_or("unknown").to_string(),
            fold.unwrap_or("").to_string(),
            name,
        ]);
    }
    write_csv(&out.join("branch.csv"), &["index", "parameter", "norm", "stability", "fold_flag", "snapshot"], &rows)?;
    let folds: Vec<Vec<String>> = branch
        .folds
        .iter()
        .map(|f| {
            let kind = if f.kind == FoldKind::Lower { "lower" } else { "upper" };
            vec![kind.to_string(), num(f.parameter), num(f.norm), f.index.to_string()]
        })
        .collect();
    write_csv(&out.join("folds.csv"), &["kind", "parameter", "norm", "index"], &folds)
}

fn report(branch: &Branch, edge: f64) -> Status {
    for f in &branch.folds {
        println!("fold {:?} at {:.8} (norm {:.6})", f.kind, f.parameter, f.norm);
    }
    if edge > EDGE_WARN {
        eprintln!("warning: state reaches the domain edge (|U| = {edge:e}); the localized branch may be affected by the domain size");
    }
    match branch.termination {
        Termination::Stalled { parameter, step } => {
            eprintln!("warning: continuation stalled at parameter {parameter} (step {step:e}); partial branch written");
            Status::Partial
        }
        t => {
            println!("terminated: {t:?} after {} points", branch.points.len());
            Status::Done
        }
    }
}

pub fn continuation(cfg: &Config, out: &Path) -> Result<Status, CliError> {
    let spec = SeedSpec::parse(&cfg.run.seed)?;
    let (n, l) = (cfg.grid.n, cfg.length());
    let mut s = settings(cfg);
    match cfg.run.system {
        System::Fcgl => {
            let p = cfg.fcgl_params();
            let prob = SteadyFcgl::new(p, n, l)?;
            let x0 = prob.encode(&fcgl_seed(cfg, &spec)?, 0.5 * l)?;
            let mut branch = trace(cfg, &prob, &x0, p.gamma, &s)?;
            if cfg.continuation.stability {
                for pt in &mut branch.points {
                    pt.stability = Some(classify_fcgl(&prob, &pt.state, pt.parameter));
                }
            }
            let edge = branch.points.iter().map(|pt| prob.edge_amplitude(&pt.state)).fold(0.0, f64::max);
            write_branch(out, &branch, cfg.continuation.snapshot_stride, |path, x| write_snapshot(path, &[(None, &prob.decode(x))]))?;
            Ok(report(&branch, edge))
        }
        System::Pde => {
            let p = cfg.model_params();
            let prob = HarmonicPde::new(p, n, l, &cfg.continuation.harmonics)?;
            let x0 = prob.encode(&pde_harmonic_seed(cfg, &spec, &cfg.continuation.harmonics)?, 0.5 * l)?;
            // Measure arclength in amplitude-equation units.
            let eps = cfg.scaling.epsilon;
            s.state_weight = 1.0 / (eps * eps);
            s.param_weight = 1.0 / (4.0 * eps * eps).powi(2);
            let mut branch = trace(cfg, &prob, &x0, p.forcing, &s)?;
            if cfg.continuation.stability {
                let st = PdeStabilitySettings::default();
                for pt in &mut branch.points {
                    pt.stability = Some(classify_pde(&prob, &pt.state, pt.parameter, &st)?.stability);
                }
            }
            let edge = branch.points.iter().map(|pt| prob.edge_amplitude(&pt.state)).fold(0.0, f64::max);
            write_branch(out, &branch, cfg.continuation.snapshot_stride, |path, x| {
                let h = prob.harmonic_fields(x);
                let cols: Vec<(Option<i64>, &ComplexField)> = h.iter().map(|(j, f)| (Some(*j), f)).collect();
                write_snapshot(path, &cols)
            })?;
            Ok(report(&branch, edge))
        }
    }
}

// ---------------------------------------------------------------- floquet

pub fn floquet(cfg: &Config, out: &Path, multipliers: bool) -> Result<Status, CliError> {
    let p = cfg.model_params();
    let fp = mathieu_critical(&p, cfg.floquet.order)?;
    let weak = cfg.scaling().to_fcgl(&p);
    let eps2 = cfg.scaling.epsilon.powi(2);
    let weak_fc = eps2 * weak_critical_forcing(weak.mu, weak.nu);
    println!("F_c = {:.10}  (weak-limit estimate {:.6})", fp.f_c, weak_fc);
    write_pairs(
        &out.join("floquet.csv"),
        &[
            pair("f_c", fp.f_c),
            pair("mu", fp.mu),
            pair("omega", fp.omega),
            text("order", cfg.floquet.order.to_string()),
            pair("residual", fp.residual),
            pair("adjoint_residual", fp.adjoint_residual),
            pair("weak_limit_f_c", weak_fc),
        ],
    )?;
    let rows: Vec<Vec<String>> = fp.table(cfg.floquet.samples).iter().map(|r| r.iter().map(|v| num(*v)).collect()).collect();
    write_csv(&out.join("eigenfunction.csv"), &["t", "p", "q", "p_adj"], &rows)?;
    if multipliers {
        let m = floquet_multipliers(p.forcing, &p)?;
        for z in &m {
            println!("multiplier at F = {}: {:.12} {:+.12}i (|z| = {:.12})", p.forcing, z.re, z.im, z.norm());
        }
        let rows: Vec<Vec<String>> = m.iter().map(|z| vec![num(p.forcing), num(z.re), num(z.im), num(z.norm())]).collect();
        write_csv(&out.join("multipliers.csv"), &["forcing", "re", "im", "abs"], &rows)?;
    }
    Ok(Status::Done)
}

// ---------------------------------------------------------------- reduce

fn weak_params(cfg: &Config) -> FcglParams {
    match cfg.run.system {
        System::Fcgl => cfg.fcgl_params(),
        System::Pde => cfg.scaling().to_fcgl(&cfg.model_params()),
    }
}

pub fn reduce(cfg: &Config, out: &Path) -> Result<Status, CliError> {
    let mut pairs = Vec::new();
    match cfg.reduce.regime {
        Regime::Weak => {
            let p = weak_params(cfg);
            let c = weak_ac_coeffs(&p)?;
            pairs.extend([
                text("regime", "weak"),
                pair("lin", c.lin),
                pair("diff", c.diff),
                pair("cub", c.cub),
                pair("phi1", weak_phase(p.mu, p.nu)),
                pair("gamma0", p.gamma0()),
                pair("criticality", p.criticality()),
                pair("gamma", p.gamma),
            ]);
            println!("weak: lin {:.6} diff {:.6} cub {:.6} phi1 {:.6}", c.lin, c.diff, c.cub, weak_phase(p.mu, p.nu));
            if p.criticality() > 0.0 {
                eprintln!("warning: mu C_r + nu C_i = {} > 0: the onset is supercritical, no sech seed", p.criticality());
                pairs.push(text("seed", "none (supercritical: mu C_r + nu C_i > 0)"));
            } else {
                match weak_sech_fcgl(&p, p.gamma) {
                    Ok(s) => pairs.extend([pair("seed_amp", s.amp), pair("seed_inv_width", s.inv_width)]),
                    Err(e) => {
                        eprintln!("warning: {e}");
                        pairs.push(text("seed", format!("none ({e})")));
                    }
                }
            }
        }
        Regime::Strong => {
            let p = cfg.model_params();
            let fp = mathieu_critical(&p, cfg.floquet.order)?;
            let c = strong_ac_coeffs(&fp, &p)?;
            pairs.extend([
                text("regime", "strong"),
                pair("f_c", fp.f_c),
                pair("lin", c.lin),
                pair("diff", c.diff),
                pair("cub", c.cub),
                pair("forcing", p.forcing),
            ]);
            println!("strong: F_c {:.8} lin {:.6} diff {:.6} cub {:.6}", fp.f_c, c.lin, c.diff, c.cub);
            match strong_sech_pde(&c, &fp, p.forcing) {
                Ok(s) => pairs.extend([pair("seed_amp", s.amp), pair("seed_inv_width", s.inv_width)]),
                Err(e) => {
                    eprintln!("warning: {e}");
                    pairs.push(text("seed", format!("none ({e})")));
                }
            }
        }
    }
    write_pairs(&out.join("reduce.csv"), &pairs)?;
    Ok(Status::Done)
}

// ---------------------------------------------------------------- flatstates

pub fn flatstates(cfg: &Config, out: &Path) -> Result<Status, CliError> {
    let p = weak_params(cfg);
    let set = flat_states(&p)?;
    let mut pairs = vec![pair("gamma", p.gamma), pair("gamma0", set.gamma0), pair("criticality", p.criticality())];
    pairs.push(match set.gamma_d {
        Some(g) => pair("gamma_d", g),
        None => text("gamma_d", "none"),
    });
    write_pairs(&out.join("flat.csv"), &pairs)?;
    let rows: Vec<Vec<String>> = set
        .roots
        .iter()
        .map(|r| {
            let a = r.amplitude();
            vec![num(r.r), num(r.r2), num(r.phi), num(a.re), num(a.im), num(quartic_residual(&p, r.r2))]
        })
        .collect();
    write_csv(&out.join("roots.csv"), &["r", "r2", "phi", "re", "im", "residual"], &rows)?;
    println!("Gamma_0 = {:.10}, Gamma_d = {:?}, {} root(s) at Gamma = {}", set.gamma0, set.gamma_d, set.roots.len(), p.gamma);
    Ok(Status::Done)
}
