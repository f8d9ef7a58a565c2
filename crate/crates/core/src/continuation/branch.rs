//! Pseudo-arclength continuation with secant prediction, adaptive steps and
//! fold location.

use super::stability::Stability;
use super::{corrector, initial_tangent, newton, Metric, NewtonSettings, SteadyProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ContinuationSettings {
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_points: usize,
    pub param_min: f64,
    pub param_max: f64,
    /// Stop once the norm drops below this (e.g. when returning to zero).
    pub norm_min: f64,
    pub norm_max: f64,
    /// Multiplies the state part of the arclength metric.
    pub state_weight: f64,
    /// Multiplies the parameter part of the arclength metric.
    pub param_weight: f64,
    pub newton: NewtonSettings,
    /// Corrector iteration cap; a step exceeding it is retried smaller.
    pub corrector_iter: usize,
    /// Steps converging within this many iterations grow the step.
    pub fast_iter: usize,
    pub grow: f64,
    pub fold_tol: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            ds: 0.01,
            ds_min: 1e-5,
            ds_max: 0.05,
            max_points: 400,
            param_min: f64::NEG_INFINITY,
            param_max: f64::INFINITY,
            norm_min: 0.0,
            norm_max: f64::INFINITY,
            state_weight: 1.0,
            param_weight: 1.0,
            newton: NewtonSettings::default(),
            corrector_iter: 8,
            fast_iter: 3,
            grow: 1.3,
            fold_tol: 1e-6,
        }
    }
}

impl ContinuationSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.ds_min > 0.0
            && self.ds_min <= self.ds
            && self.ds <= self.ds_max
            && self.param_min < self.param_max
            && self.state_weight > 0.0
            && self.param_weight > 0.0
            && self.grow >= 1.0
            && self.fold_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("inconsistent continuation settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub parameter: f64,
    pub norm: f64,
    pub state: Vec<f64>,
    pub arclength: f64,
    pub stability: Option<Stability>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldKind {
    /// The parameter reaches a local minimum along the branch.
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fold {
    pub parameter: f64,
    pub norm: f64,
    /// Index of the branch point nearest to the fold.
    pub index: usize,
    pub kind: FoldKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    MaxPoints,
    ParameterBound,
    NormBound,
    Stalled { parameter: f64, step: f64 },
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub folds: Vec<Fold>,
    pub termination: Termination,
}

impl Branch {
    pub fn fold_parameters(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.parameter).collect()
    }

    /// Smallest lower fold and largest upper fold.
    pub fn outermost_folds(&self) -> (Option<f64>, Option<f64>) {
        let lower = self.folds.iter().filter(|f| f.kind == FoldKind::Lower).map(|f| f.parameter).reduce(f64::min);
        let upper = self.folds.iter().filter(|f| f.kind == FoldKind::Upper).map(|f| f.parameter).reduce(f64::max);
        (lower, upper)
    }

    pub fn is_stalled(&self) -> bool {
        matches!(self.termination, Termination::Stalled { .. })
    }

    /// Joins a branch traced the other way from the same start: `other`
    /// reversed, then `self`.
    pub fn merged_with(self, other: Branch) -> Branch {
        let offset = other.points.len().saturating_sub(1);
        let mut points: Vec<BranchPoint> = other.points.into_iter().rev().collect();
        let first_s = points.first().map(|p| p.arclength).unwrap_or(0.0);
        for p in &mut points {
            p.arclength = first_s - p.arclength;
        }
        let mut folds: Vec<Fold> =
            other.folds.into_iter().map(|f| Fold { index: offset - f.index.min(offset), ..f }).collect();
        folds.reverse();
        let base = points.last().map(|p| p.arclength).unwrap_or(0.0);
        points.extend(self.points.into_iter().skip(1).map(|mut p| {
            p.arclength += base;
            p
        }));
        folds.extend(self.folds.into_iter().map(|f| Fold { index: f.index + offset, ..f }));
        let termination = match (self.termination, other.termination) {
            (t @ Termination::Stalled { .. }, _) => t,
            (_, t @ Termination::Stalled { .. }) => t,
            (t, _) => t,
        };
        Branch { points, folds, termination }
    }
}

struct Tracker<'a, P: SteadyProblem + ?Sized> {
    problem: &'a P,
    metric: Metric,
    settings: ContinuationSettings,
}

impl<P: SteadyProblem + ?Sized> Tracker<'_, P> {
    fn newton_settings(&self) -> NewtonSettings {
        NewtonSettings { tol: self.settings.newton.tol, max_iter: self.settings.corrector_iter }
    }

    /// One predictor-corrector step of length `ds`.
    fn step(&self, x: &[f64], lam: f64, t: &(Vec<f64>, f64), ds: f64) -> Result<(Vec<f64>, f64, usize)> {
        let xp: Vec<f64> = x.iter().zip(&t.0).map(|(a, b)| a + ds * b).collect();
        let lp = lam + ds * t.1;
        corrector(self.problem, &self.metric, (&xp, lp), (&t.0, t.1), self.newton_settings())
    }

    fn secant(&self, a: (&[f64], f64), b: (&[f64], f64)) -> ((Vec<f64>, f64), f64) {
        let mut v: Vec<f64> = b.0.iter().zip(a.0).map(|(x, y)| x - y).collect();
        let mut l = b.1 - a.1;
        let len = self.metric.dot((&v, l), (&v, l)).sqrt();
        self.metric.normalise((&mut v, &mut l));
        ((v, l), len)
    }

    /// Vertex of the parabola through three `(s, lambda)` samples.
    fn vertex(s: [f64; 3], l: [f64; 3]) -> f64 {
        let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
        let f01 = (l[1] - l[0]) / d1;
        let f12 = (l[2] - l[1]) / d2;
        let c2 = (f12 - f01) / (s[2] - s[0]);
        if c2 == 0.0 {
            return l[1];
        }
        let c1 = f01 - c2 * (s[0] + s[1]);
        let sv = -c1 / (2.0 * c2);
        l[0] + f01 * (sv - s[0]) + c2 * (sv - s[0]) * (sv - s[1])
    }

    /// Re-traces the stretch `prev -> a -> b` around a fold with smaller
    /// steps until the fitted parameter settles to `fold_tol`.
    fn refine_fold(&self, pts: [(&[f64], f64, f64); 3]) -> f64 {
        let mut estimate = Self::vertex([pts[0].2, pts[1].2, pts[2].2], [pts[0].1, pts[1].1, pts[2].1]);
        let (mut x0, mut l0, mut s0) = (pts[0].0.to_vec(), pts[0].1, pts[0].2);
        let (mut x1, mut l1, mut s1) = (pts[1].0.to_vec(), pts[1].1, pts[1].2);
        let mut h = (pts[2].2 - pts[1].2).min(pts[1].2 - pts[0].2) / 4.0;
        for _ in 0..8 {
            if h < self.settings.ds_min {
                break;
            }
            // March from (x0, x1) with steps h until the parameter turns.
            let mut hist: Vec<(Vec<f64>, f64, f64)> = vec![(x0.clone(), l0, s0), (x1.clone(), l1, s1)];
            let mut found = None;
            for _ in 0..64 {
                let n = hist.len();
                let (t, _) = self.secant((&hist[n - 2].0, hist[n - 2].1), (&hist[n - 1].0, hist[n - 1].1));
                let Ok((x, l, _)) = self.step(&hist[n - 1].0, hist[n - 1].1, &t, h) else { break };
                let s = hist[n - 1].2 + h;
                let turned = (l - hist[n - 1].1).signum() != (hist[n - 1].1 - hist[n - 2].1).signum();
                hist.push((x, l, s));
                if turned {
                    found = Some(hist.len() - 1);
                    break;
                }
            }
            let Some(k) = found else { break };
            let new = Self::vertex([hist[k - 2].2, hist[k - 1].2, hist[k].2], [hist[k - 2].1, hist[k - 1].1, hist[k].1]);
            let settled = (new - estimate).abs() < self.settings.fold_tol;
            estimate = new;
            if settled {
                break;
            }
            (x0, l0, s0) = hist[k - 2].clone();
            (x1, l1, s1) = hist[k - 1].clone();
            h /= 4.0;
        }
        estimate
    }
}

/// Traces a branch from the converged (or nearly converged) state `x0` at
/// `lambda0`, initially moving the parameter in the sign of `direction`.
pub fn continue_branch<P: SteadyProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    lambda0: f64,
    direction: f64,
    settings: &ContinuationSettings,
) -> Result<Branch> {
    settings.validate()?;
    let start = newton(problem, x0, lambda0, settings.newton)?;
    let metric = Metric {
        w: problem.weights().iter().map(|w| w * settings.state_weight).collect(),
        param_weight: settings.param_weight,
    };
    let tr = Tracker { problem, metric, settings: *settings };
    let mut tangent = initial_tangent(problem, &tr.metric, &start.x, lambda0, direction)?;
    let mut points = vec![BranchPoint {
        parameter: lambda0,
        norm: problem.norm(&start.x),
        state: start.x,
        arclength: 0.0,
        stability: None,
    }];
    let mut folds = Vec::new();
    let mut ds = settings.ds;
    let termination = loop {
        if points.len() >= settings.max_points {
            break Termination::MaxPoints;
        }
        let last = points.last().expect("branch has a start point");
        let attempt = tr.step(&last.state, last.parameter, &tangent, ds).and_then(|(x, l, it)| {
            let (t_new, len) = tr.secant((&last.state, last.parameter), (&x, l));
            // Reject steps that jump: the new secant must stay near the old one.
            let cos = tr.metric.dot((&t_new.0, t_new.1), (&tangent.0, tangent.1));
            if cos < 0.7 || !(len > 0.0) {
                return Err(Error::Divergence { iterations: it, residual: f64::NAN });
            }
            Ok((x, l, it, t_new, len))
        });
        let (x, l, it, t_new, len) = match attempt {
            Ok(v) => v,
            Err(_) => {
                ds *= 0.5;
                if ds < settings.ds_min {
                    break Termination::Stalled { parameter: last.parameter, step: ds };
                }
                continue;
            }
        };
        let s = last.arclength + len;
        let norm = problem.norm(&x);
        if tangent.1 * t_new.1 < 0.0 && points.len() >= 2 {
            let n = points.len();
            let a = &points[n - 2];
            let b = &points[n - 1];
            let parameter = tr.refine_fold([(&a.state, a.parameter, a.arclength), (&b.state, b.parameter, b.arclength), (&x, l, s)]);
            let kind = if tangent.1 > 0.0 { FoldKind::Upper } else { FoldKind::Lower };
            folds.push(Fold { parameter, norm: b.norm, index: n - 1, kind });
        }
        tangent = t_new;
        points.push(BranchPoint { parameter: l, norm, state: x, arclength: s, stability: None });
        if it <= settings.fast_iter {
            ds = (ds * settings.grow).min(settings.ds_max);
        }
        if l < settings.param_min || l > settings.param_max {
            break Termination::ParameterBound;
        }
        if norm < settings.norm_min || norm > settings.norm_max {
            break Termination::NormBound;
        }
    };
    Ok(Branch { points, folds, termination })
}
