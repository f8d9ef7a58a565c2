//! Periodic Fourier machinery on a uniform grid.
//!
//! Coefficients are stored in FFT order: index `i` holds integer wavenumber
//! `m = i` for `i < n/2` and `m = i - n` otherwise, with physical wavenumber
//! `k_m = 2 pi m / L`. The forward transform is unnormalised and the inverse
//! divides by `n`.
//!
//! Cubic products are dealiased by zero-padding onto a grid of `2n` points,
//! which is exact for cubic nonlinearities of fields with an empty Nyquist
//! mode.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{check_grid, ComplexField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    length: f64,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(length: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_grid(coeffs.len(), length)?;
        Ok(Self { length, coeffs })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of integer wavenumber `m` in `-n/2 ..= n/2 - 1`.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        self.coeffs[m.rem_euclid(n) as usize]
    }
}

/// Integer wavenumber stored at FFT index `i`.
pub fn wavenumber_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub struct SpectralEngine {
    n: usize,
    length: f64,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fine_fwd: Arc<dyn Fft<f64>>,
    fine_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralEngine").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl Clone for SpectralEngine {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            length: self.length,
            k: self.k.clone(),
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
            fine_fwd: Arc::clone(&self.fine_fwd),
            fine_inv: Arc::clone(&self.fine_inv),
        }
    }
}

impl SpectralEngine {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        check_grid(n, length)?;
        let mut planner = FftPlanner::new();
        let k = (0..n).map(|i| 2.0 * PI * wavenumber_index(i, n) as f64 / length).collect();
        Ok(Self {
            n,
            length,
            k,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fine_fwd: planner.plan_fft_forward(2 * n),
            fine_inv: planner.plan_fft_inverse(2 * n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Physical wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::Shape { expected: self.n, got });
        }
        Ok(())
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        for v in &mut buf {
            *v *= s;
        }
        buf
    }

    pub fn to_spectral(&self, field: &ComplexField) -> Result<SpectralField> {
        self.check_len(field.len())?;
        Ok(SpectralField { length: self.length, coeffs: self.forward(field.values()) })
    }

    pub fn from_spectral(&self, spec: &SpectralField) -> Result<ComplexField> {
        self.check_len(spec.coeffs.len())?;
        ComplexField::new(self.length, self.inverse(&spec.coeffs))
    }

    /// Multiplies every coefficient by `-k^2`; the Nyquist mode is zeroed.
    pub fn second_derivative_coeffs(&self, coeffs: &mut [Complex64]) {
        for (c, &k) in coeffs.iter_mut().zip(&self.k) {
            *c *= -k * k;
        }
        coeffs[self.n / 2] = ZERO;
    }

    pub fn second_derivative(&self, field: &ComplexField) -> Result<ComplexField> {
        self.check_len(field.len())?;
        let mut c = self.forward(field.values());
        self.second_derivative_coeffs(&mut c);
        ComplexField::new(self.length, self.inverse(&c))
    }

    /// Samples the band-limited function with coefficients `coeffs` on the
    /// `2n` point grid. The Nyquist coefficient is dropped.
    pub fn to_fine(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let half = n / 2;
        let mut buf = vec![ZERO; 2 * n];
        buf[..half].copy_from_slice(&coeffs[..half]);
        buf[2 * n - half + 1..].copy_from_slice(&coeffs[half + 1..]);
        self.fine_inv.process(&mut buf);
        let s = 1.0 / n as f64;
        for v in &mut buf {
            *v *= s;
        }
        buf
    }

    /// Inverse of [`Self::to_fine`]: transforms `2n` samples and truncates to
    /// `|m| < n/2`, returning coefficients in the coarse convention.
    pub fn from_fine(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let half = n / 2;
        let mut buf = values.to_vec();
        self.fine_fwd.process(&mut buf);
        let mut out = vec![ZERO; n];
        out[..half].copy_from_slice(&buf[..half]);
        out[half + 1..].copy_from_slice(&buf[2 * n - half + 1..]);
        for v in &mut out {
            *v *= 0.5;
        }
        out
    }

    /// Unnormalised forward transform of `2n` fine-grid samples.
    pub fn fine_forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fine_fwd.process(&mut buf);
        buf
    }

    /// Dealiased `C |u|^2 u` from spectral input to spectral output.
    pub fn cubic_coeffs(&self, coeffs: &[Complex64], c: Complex64) -> Vec<Complex64> {
        let mut fine = self.to_fine(coeffs);
        for v in &mut fine {
            *v = c * v.norm_sqr() * *v;
        }
        self.from_fine(&fine)
    }

    pub fn cubic_term(&self, field: &ComplexField, c_re: f64, c_im: f64) -> Result<ComplexField> {
        self.check_len(field.len())?;
        let coeffs = self.forward(field.values());
        let out = self.cubic_coeffs(&coeffs, Complex64::new(c_re, c_im));
        ComplexField::new(self.length, self.inverse(&out))
    }
}
