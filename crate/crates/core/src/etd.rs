//! Second-order exponential time differencing (Cox–Matthews ETD2) in
//! Fourier space.
//!
//! The autonomous linear part is propagated exactly; the cubic term and the
//! parametric forcing are both treated as the "nonlinear" part `N(u, t)`:
//!
//! `u_{n+1} = e^{z} u_n + h a(z) N_n + h b(z) N_{n-1}`, `z = l h`,
//! `a(z) = ((1 + z) e^z - 1 - 2z) / z^2`, `b(z) = (1 + z - e^z) / z^2`.
//!
//! The first step uses exponential Euler, `u_1 = e^z u_0 + h phi_1(z) N_0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::model::{solution_norm, FcglParams, ModelParams};
use crate::spectral::SpectralEngine;

const CONTOUR_POINTS: usize = 32;
const CONTOUR_SWITCH: f64 = 0.5;

/// A system `u_t = L u + N(u, t)` with `L` diagonal in Fourier space.
pub trait SemilinearSystem {
    fn linear_symbol(&self, k: f64) -> Complex64;

    /// `N(u, t)` for spectral input, returned in spectral form.
    fn nonlinear(&self, engine: &SpectralEngine, coeffs: &[Complex64], t: f64) -> Vec<Complex64>;
}

/// Spectral coefficients of `conj(u)` given those of `u`.
pub(crate) fn conj_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    (0..n).map(|i| coeffs[(n - i) % n].conj()).collect()
}

impl SemilinearSystem for ModelParams {
    fn linear_symbol(&self, k: f64) -> Complex64 {
        Complex64::new(self.mu - self.alpha * k * k, self.omega - self.beta * k * k)
    }

    fn nonlinear(&self, engine: &SpectralEngine, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let mut out = engine.cubic_coeffs(coeffs, self.cubic());
        let drive = Complex64::new(0.0, 0.5 * self.forcing * (2.0 * t).cos());
        if drive.im != 0.0 {
            let conj = conj_coeffs(coeffs);
            for ((o, u), uc) in out.iter_mut().zip(coeffs).zip(&conj) {
                *o += drive * (u + uc);
            }
        }
        out
    }
}

impl SemilinearSystem for FcglParams {
    fn linear_symbol(&self, k: f64) -> Complex64 {
        Complex64::new(self.mu - self.alpha * k * k, self.nu - self.beta * k * k)
    }

    fn nonlinear(&self, engine: &SpectralEngine, coeffs: &[Complex64], _t: f64) -> Vec<Complex64> {
        let mut out = engine.cubic_coeffs(coeffs, self.cubic());
        if self.gamma != 0.0 {
            for (o, uc) in out.iter_mut().zip(conj_coeffs(coeffs)) {
                *o += self.gamma * uc;
            }
        }
        out
    }
}

/// Per-mode ETD coefficients.
#[derive(Debug, Clone)]
pub struct EtdScheme {
    dt: f64,
    expo: Vec<Complex64>,
    euler: Vec<Complex64>,
    w_now: Vec<Complex64>,
    w_prev: Vec<Complex64>,
}

fn direct_weights(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let ez = z.exp();
    let z2 = z * z;
    ((ez - 1.0) / z, ((1.0 + z) * ez - 1.0 - 2.0 * z) / z2, (1.0 + z - ez) / z2)
}

/// `(phi_1, a, b)` at `z`; contour averaged near the removable singularity.
pub fn etd_weights(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() >= CONTOUR_SWITCH {
        return direct_weights(z);
    }
    let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for j in 0..CONTOUR_POINTS {
        let th = 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let (p, a, b) = direct_weights(z + Complex64::from_polar(1.0, th));
        acc.0 += p;
        acc.1 += a;
        acc.2 += b;
    }
    let s = 1.0 / CONTOUR_POINTS as f64;
    (acc.0 * s, acc.1 * s, acc.2 * s)
}

impl EtdScheme {
    pub fn new(symbols: &[Complex64], dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        let n = symbols.len();
        let mut s = Self {
            dt,
            expo: Vec::with_capacity(n),
            euler: Vec::with_capacity(n),
            w_now: Vec::with_capacity(n),
            w_prev: Vec::with_capacity(n),
        };
        for &l in symbols {
            let z = l * dt;
            let (p1, a, b) = etd_weights(z);
            s.expo.push(z.exp());
            s.euler.push(p1 * dt);
            s.w_now.push(a * dt);
            s.w_prev.push(b * dt);
        }
        if s.expo.iter().chain(&s.w_now).chain(&s.w_prev).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Parameter("non-finite ETD coefficients".into()));
        }
        Ok(s)
    }

    pub fn for_system<S: SemilinearSystem + ?Sized>(system: &S, engine: &SpectralEngine, dt: f64) -> Result<Self> {
        let symbols: Vec<Complex64> = engine.wavenumbers().iter().map(|&k| system.linear_symbol(k)).collect();
        Self::new(&symbols, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.expo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expo.is_empty()
    }

    /// ETD2 weights for mode `i`: multipliers of `N_n` and `N_{n-1}`.
    pub fn weights(&self, i: usize) -> (Complex64, Complex64) {
        (self.w_now[i], self.w_prev[i])
    }

    pub fn propagator(&self, i: usize) -> Complex64 {
        self.expo[i]
    }

    pub fn advance_euler(&self, u: &mut [Complex64], n_now: &[Complex64]) {
        for i in 0..u.len() {
            u[i] = self.expo[i] * u[i] + self.euler[i] * n_now[i];
        }
    }

    pub fn advance(&self, u: &mut [Complex64], n_now: &[Complex64], n_prev: &[Complex64]) {
        for i in 0..u.len() {
            u[i] = self.expo[i] * u[i] + self.w_now[i] * n_now[i] + self.w_prev[i] * n_prev[i];
        }
    }
}

/// Passed to observers during [`Integrator::evolve`].
pub struct Observation<'a> {
    pub step: u64,
    pub t: f64,
    pub norm: f64,
    pub state: &'a ComplexField,
}

/// Fixed-step ETD2 integration of one system; the state lives in Fourier space.
pub struct Integrator<S: SemilinearSystem> {
    system: S,
    engine: SpectralEngine,
    scheme: EtdScheme,
    coeffs: Vec<Complex64>,
    prev: Option<Vec<Complex64>>,
    t: f64,
    steps: u64,
}

impl<S: SemilinearSystem> Integrator<S> {
    pub fn new(system: S, initial: &ComplexField, t0: f64, dt: f64) -> Result<Self> {
        initial.ensure_finite()?;
        let engine = SpectralEngine::new(initial.len(), initial.length())?;
        let scheme = EtdScheme::for_system(&system, &engine, dt)?;
        let coeffs = engine.forward(initial.values());
        Ok(Self { system, engine, scheme, coeffs, prev: None, t: t0, steps: 0 })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.scheme.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn engine(&self) -> &SpectralEngine {
        &self.engine
    }

    pub fn state(&self) -> ComplexField {
        ComplexField::new(self.engine.length(), self.engine.inverse(&self.coeffs))
            .expect("integrator grid was validated at construction")
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Replaces the state (e.g. after a perturbation) and restarts the
    /// two-step history.
    pub fn reset_state(&mut self, state: &ComplexField) -> Result<()> {
        if state.len() != self.engine.n() {
            return Err(Error::Shape { expected: self.engine.n(), got: state.len() });
        }
        state.ensure_finite()?;
        self.coeffs = self.engine.forward(state.values());
        self.prev = None;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let nl = self.system.nonlinear(&self.engine, &self.coeffs, self.t);
        match &self.prev {
            None => self.scheme.advance_euler(&mut self.coeffs, &nl),
            Some(prev) => self.scheme.advance(&mut self.coeffs, &nl, prev),
        }
        self.prev = Some(nl);
        self.steps += 1;
        self.t += self.scheme.dt;
        if self.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp { step: self.steps, time: self.t });
        }
        Ok(())
    }

    pub fn run_steps(&mut self, count: u64) -> Result<()> {
        for _ in 0..count {
            self.step()?;
        }
        Ok(())
    }

    /// Integrates to `t1` (rounded to a whole number of steps). The observer
    /// sees the initial state and then every `stride` steps.
    pub fn evolve(
        &mut self,
        t1: f64,
        stride: u64,
        mut observer: impl FnMut(&Observation<'_>),
    ) -> Result<ComplexField> {
        if !(t1 > self.t) {
            return Err(Error::Parameter(format!("end time {t1} must exceed current time {}", self.t)));
        }
        let count = ((t1 - self.t) / self.scheme.dt).round() as u64;
        let stride = stride.max(1);
        let emit = |s: &Self, observer: &mut dyn FnMut(&Observation<'_>)| {
            let state = s.state();
            observer(&Observation { step: s.steps, t: s.t, norm: solution_norm(&state), state: &state });
        };
        emit(self, &mut observer);
        for i in 1..=count {
            self.step()?;
            if i % stride == 0 {
                emit(self, &mut observer);
            }
        }
        Ok(self.state())
    }

    /// Advances whole periods until consecutive stroboscopic snapshots differ
    /// by less than `tol` in the solution norm. The period must be a whole
    /// number of steps.
    pub fn relax_stroboscopic(&mut self, period: f64, tol: f64, max_periods: usize) -> Result<StroboscopicReport> {
        let per = (period / self.scheme.dt).round();
        if per < 1.0 || (per * self.scheme.dt - period).abs() > 1e-9 * period {
            return Err(Error::Parameter(format!(
                "period {period} is not a whole number of steps of {}",
                self.scheme.dt
            )));
        }
        let mut last = self.state();
        let mut change = f64::INFINITY;
        for k in 1..=max_periods {
            self.run_steps(per as u64)?;
            let now = self.state();
            change = solution_norm(&now.sub(&last)?);
            last = now;
            if change < tol {
                return Ok(StroboscopicReport { periods: k, change, converged: true, norm: solution_norm(&last) });
            }
        }
        Ok(StroboscopicReport { periods: max_periods, change, converged: false, norm: solution_norm(&last) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StroboscopicReport {
    pub periods: usize,
    /// Norm of the difference between the last two snapshots.
    pub change: f64,
    pub converged: bool,
    pub norm: f64,
}
