//! Allen–Cahn reductions `B_T = lin lambda B + diff B_XX + cub B^3` near the
//! onset of the subharmonic instability, and the sech seeds they predict.
//!
//! Weak damping: closed-form quotients of the amplitude-equation parameters,
//! with `lambda = Gamma - Gamma_0`. Strong damping: solvability-condition
//! inner products against the adjoint Mathieu eigenfunction, with
//! `eps_1^2 lambda = F / F_0 - 1`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::floquet::{FloquetPair, TrigSeries};
use crate::model::{FcglParams, ModelParams, ScalingMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Weak { phi1: f64 },
    /// `f0` is the critical forcing the reduction is taken about.
    Strong { f0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllenCahnCoeffs {
    pub lin: f64,
    pub diff: f64,
    pub cub: f64,
    pub regime: Regime,
}

/// `u(x, t) = amp sech(inv_width (x - center)) envelope(t)`. Stationary
/// profiles have an envelope with only the zero harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct SechProfile {
    pub amp: f64,
    pub inv_width: f64,
    pub center: f64,
    pub envelope: TrigSeries,
}

impl SechProfile {
    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        self.amp / (self.inv_width * (x - self.center)).cosh() * self.envelope.eval(t)
    }

    fn shape(&self, x: f64, length: f64) -> f64 {
        // Periodic image closest to the centre.
        let d = (x - self.center + 0.5 * length).rem_euclid(length) - 0.5 * length;
        self.amp / (self.inv_width * d).cosh()
    }

    pub fn field(&self, n: usize, length: f64, t: f64) -> Result<ComplexField> {
        let env = self.envelope.eval(t);
        ComplexField::from_fn(n, length, |x| self.shape(x, length) * env)
    }

    /// Spatial profile multiplying `e^{i harmonic t}`.
    pub fn harmonic_field(&self, n: usize, length: f64, harmonic: i64) -> Result<ComplexField> {
        let c = self.envelope.coeff(harmonic);
        ComplexField::from_fn(n, length, |x| self.shape(x, length) * c)
    }
}

/// Phase `phi_1` solving `e^{-2 i phi_1} = -(mu + i nu) / sqrt(mu^2 + nu^2)`.
pub fn weak_phase(mu: f64, nu: f64) -> f64 {
    -0.5 * (-nu).atan2(-mu)
}

pub fn weak_ac_coeffs(p: &FcglParams) -> Result<AllenCahnCoeffs> {
    if p.mu == 0.0 {
        return Err(Error::SingularReduction("weak reduction divides by mu = 0".into()));
    }
    let g0 = p.gamma0();
    Ok(AllenCahnCoeffs {
        lin: -g0 / p.mu,
        diff: (p.alpha * p.mu + p.beta * p.nu) / p.mu,
        cub: p.criticality() / p.mu,
        regime: Regime::Weak { phi1: weak_phase(p.mu, p.nu) },
    })
}

/// Checks the sign conditions under which the weak sech pulse exists.
pub fn weak_existence(p: &FcglParams, gamma: f64) -> Result<()> {
    let g0 = p.gamma0();
    if gamma > g0 {
        return Err(Error::Existence(format!("Gamma = {gamma} exceeds Gamma_0 = {g0}")));
    }
    if !(p.mu < 0.0) {
        return Err(Error::Existence(format!("mu = {} is not negative", p.mu)));
    }
    if !(p.criticality() < 0.0) {
        return Err(Error::Existence(format!(
            "mu C_r + nu C_i = {} is not negative (supercritical)",
            p.criticality()
        )));
    }
    let disp = p.alpha * p.mu + p.beta * p.nu;
    if !(disp < 0.0) {
        return Err(Error::Existence(format!("alpha mu + beta nu = {disp} is not negative")));
    }
    Ok(())
}

fn constant_envelope(c: Complex64) -> TrigSeries {
    TrigSeries::from_coeffs(0, |_| c)
}

/// Stationary sech pulse of the amplitude equation at forcing `gamma`.
pub fn weak_sech_fcgl(p: &FcglParams, gamma: f64) -> Result<SechProfile> {
    weak_existence(p, gamma)?;
    let g0 = p.gamma0();
    let lam = (gamma - g0) * g0;
    let amp = (2.0 * lam / p.criticality()).sqrt();
    let inv_width = (lam / (p.alpha * p.mu + p.beta * p.nu)).sqrt();
    let phase = Complex64::from_polar(1.0, weak_phase(p.mu, p.nu));
    Ok(SechProfile { amp, inv_width, center: 0.0, envelope: constant_envelope(phase) })
}

/// The weak pulse carried back to the model PDE: `U = eps A(eps x) e^{i pi/4} e^{it}`.
pub fn weak_sech_pde(p: &ModelParams, s: &ScalingMap) -> Result<SechProfile> {
    let fp = s.to_fcgl(p);
    let a = weak_sech_fcgl(&fp, fp.gamma)?;
    let eps = s.epsilon;
    let c = a.envelope.coeff(0) * Complex64::from_polar(1.0, FRAC_PI_4);
    let envelope = TrigSeries::from_coeffs(1, |n| if n == 1 { c } else { Complex64::new(0.0, 0.0) });
    Ok(SechProfile { amp: eps * a.amp, inv_width: eps * a.inv_width, center: 0.0, envelope })
}

/// First-harmonic PDE profile `eps A(eps x) e^{i pi/4}` of an amplitude-equation
/// field. Grid points map one to one; the domain grows by `1 / eps`.
pub fn lift_to_pde(a: &ComplexField, s: &ScalingMap) -> Result<ComplexField> {
    let c = s.epsilon * Complex64::from_polar(1.0, FRAC_PI_4);
    ComplexField::new(a.length() / s.epsilon, a.values().iter().map(|v| c * v).collect())
}

/// Time samples per period for the cubic solvability integrals.
fn quadrature_points(max: usize) -> usize {
    (8 * (max + 1)).next_power_of_two()
}

/// Solvability-condition coefficients from the critical Floquet data.
pub fn strong_ac_coeffs(fp: &FloquetPair, p: &ModelParams) -> Result<AllenCahnCoeffs> {
    let (mu, om) = (fp.mu, fp.omega);
    let m = quadrature_points(fp.p.max_harmonic().max(fp.p_adj.max_harmonic()));
    let re = |s: &TrigSeries| -> Vec<f64> { s.samples(m).iter().map(|c| c.re).collect() };
    let p1 = re(&fp.p);
    let pd = re(&fp.p.derivative());
    let q1 = re(&fp.q);
    let pa = re(&fp.p_adj);
    let pad = re(&fp.p_adj.derivative());
    let t: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();

    let mean = |f: &dyn Fn(usize) -> f64| (0..m).map(f).sum::<f64>() / m as f64;
    // <p_adj, G> and <p_adj, (d/dt - mu) G> = <-p_adj' - mu p_adj, G>
    let ip = |g: &dyn Fn(usize) -> f64| mean(&|j| pa[j] * g(j));
    let ip_d = |g: &dyn Fn(usize) -> f64| mean(&|j| (-pad[j] - mu * pa[j]) * g(j));

    let mass = ip(&|j| 2.0 * (pd[j] - mu * p1[j]));
    if mass.abs() < 1e-10 {
        return Err(Error::SingularReduction(format!("solvability mass term {mass:e} vanishes")));
    }
    let (al, be, cr, ci) = (p.alpha, p.beta, p.c_re, p.c_im);
    let lin = -ip(&|j| om * fp.f_c * (2.0 * t[j]).cos() * p1[j]) / mass;
    let diff = (ip_d(&|j| al * p1[j] - be * q1[j]) - ip(&|j| om * (al * q1[j] + be * p1[j]))) / mass;
    let r2 = |j: usize| p1[j] * p1[j] + q1[j] * q1[j];
    let cub = (ip(&|j| -om * r2(j) * (cr * q1[j] + ci * p1[j])) + ip_d(&|j| r2(j) * (cr * p1[j] - ci * q1[j]))) / mass;
    Ok(AllenCahnCoeffs { lin, diff, cub, regime: Regime::Strong { f0: fp.f_c } })
}

/// Strong-damping sech seed `sqrt(-2 lin d / cub) sech(sqrt(-lin d / diff) x) (p + i q)`
/// with `d = F / F_0 - 1`.
pub fn strong_sech_pde(coeffs: &AllenCahnCoeffs, fp: &FloquetPair, forcing: f64) -> Result<SechProfile> {
    let f0 = match coeffs.regime {
        Regime::Strong { f0 } => f0,
        Regime::Weak { .. } => fp.f_c,
    };
    if forcing > f0 {
        return Err(Error::Existence(format!("F = {forcing} exceeds F_0 = {f0}")));
    }
    let d = forcing / f0 - 1.0;
    let a2 = -2.0 * coeffs.lin * d / coeffs.cub;
    let k2 = -coeffs.lin * d / coeffs.diff;
    if a2 < 0.0 || k2 < 0.0 {
        return Err(Error::Existence(format!(
            "coefficient signs (lin {}, diff {}, cub {}) admit no sech pulse below onset",
            coeffs.lin, coeffs.diff, coeffs.cub
        )));
    }
    Ok(SechProfile { amp: a2.sqrt(), inv_width: k2.sqrt(), center: 0.0, envelope: fp.envelope() })
}
