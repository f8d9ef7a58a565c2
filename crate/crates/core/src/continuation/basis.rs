//! Reflection-symmetric fields on a periodic grid.
//!
//! An even field about `x = 0` is stored as `a_m`, `m = 0..n/2`, with
//! `A(x) = a_0 + 2 sum_{m>=1} a_m cos(k_m x)`, i.e. `a_m` is the normalised
//! Fourier coefficient of both `e^{+ik_m x}` and `e^{-ik_m x}`. The Nyquist
//! mode is dropped. Odd fields use `b_m`, `m = 1..n/2`, with
//! `A(x) = 2i sum b_m sin(k_m x)`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::spectral::SpectralEngine;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct EvenBasis {
    engine: SpectralEngine,
}

impl EvenBasis {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Ok(Self { engine: SpectralEngine::new(n, length)? })
    }

    pub fn engine(&self) -> &SpectralEngine {
        &self.engine
    }

    pub fn n(&self) -> usize {
        self.engine.n()
    }

    pub fn length(&self) -> f64 {
        self.engine.length()
    }

    /// Number of complex cosine coefficients.
    pub fn modes(&self) -> usize {
        self.engine.n() / 2
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.engine.length()
    }

    /// Full coefficient array in the engine's (unnormalised) convention.
    pub fn full_coeffs(&self, a: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mut c = vec![ZERO; n];
        c[0] = a[0] * n as f64;
        for m in 1..self.modes() {
            c[m] = a[m] * n as f64;
            c[n - m] = c[m];
        }
        c
    }

    /// Grid values of the even field, centred at `x = 0`.
    pub fn values(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.engine.inverse(&self.full_coeffs(a))
    }

    /// Grid values with the centre moved to `x = L/2`.
    pub fn centred_field(&self, a: &[Complex64]) -> ComplexField {
        let shifted: Vec<Complex64> =
            a.iter().enumerate().map(|(m, &c)| if m % 2 == 1 { -c } else { c }).collect();
        ComplexField::new(self.length(), self.values(&shifted)).expect("basis grid is valid")
    }

    /// Even part of `coeffs` (engine convention) as cosine coefficients.
    pub fn from_full(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let s = 0.5 / n as f64;
        let mut a = vec![ZERO; self.modes()];
        a[0] = coeffs[0] / n as f64;
        for m in 1..self.modes() {
            a[m] = (coeffs[m] + coeffs[n - m]) * s;
        }
        a
    }

    /// Projects grid values centred at `x = center` onto even fields about it.
    pub fn project(&self, field: &ComplexField, center: f64) -> Result<Vec<Complex64>> {
        if field.len() != self.n() {
            return Err(Error::Shape { expected: self.n(), got: field.len() });
        }
        let mut c = self.engine.forward(field.values());
        for (i, v) in c.iter_mut().enumerate() {
            let k = self.engine.wavenumbers()[i];
            *v *= Complex64::from_polar(1.0, k * center);
        }
        Ok(self.from_full(&c))
    }

    /// Largest odd component of a field about `center`, relative to its size.
    pub fn asymmetry(&self, field: &ComplexField, center: f64) -> Result<f64> {
        let even = self.project(field, center)?;
        let mut c = self.full_coeffs(&even);
        for (i, v) in c.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, -self.engine.wavenumbers()[i] * center);
        }
        let back = self.engine.inverse(&c);
        let scale = field.max_abs().max(f64::MIN_POSITIVE);
        Ok(field.values().iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
    }

    /// Samples on the dealiasing grid of `2n` points.
    pub fn fine_values(&self, a: &[Complex64]) -> Vec<Complex64> {
        self.engine.to_fine(&self.full_coeffs(a))
    }

    /// Cosine coefficients of fine-grid samples of an even field.
    pub fn from_fine(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.from_full(&self.engine.from_fine(values))
    }

    /// Normalised Fourier coefficients `g_j`, `|j| <= n - 1`, of fine-grid
    /// samples, returned as `j -> g_j` through [`FineSpectrum::get`].
    pub fn fine_spectrum(&self, values: &[Complex64]) -> FineSpectrum {
        let n2 = 2 * self.n();
        let c = self.engine.fine_forward(values);
        FineSpectrum { coeffs: c.into_iter().map(|v| v / n2 as f64).collect() }
    }

    /// `sum_m |a_m|^2` weighted to give `(1/L) int |A|^2 dx`.
    pub fn mean_square(&self, a: &[Complex64]) -> f64 {
        a[0].norm_sqr() + 2.0 * a[1..].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Matrix of `delta -> g delta` on even fields (`odd = false`) or odd
    /// fields (`odd = true`), in coefficient coordinates.
    pub fn multiplication_operator(&self, g: &FineSpectrum, odd: bool) -> Array2<Complex64> {
        let m = self.modes();
        if odd {
            let mut op = Array2::from_elem((m - 1, m - 1), ZERO);
            for r in 1..m {
                for c in 1..m {
                    op[[r - 1, c - 1]] = g.get(r as i64 - c as i64) - g.get((r + c) as i64);
                }
            }
            op
        } else {
            let mut op = Array2::from_elem((m, m), ZERO);
            for r in 0..m {
                op[[r, 0]] = g.get(r as i64);
                for c in 1..m {
                    op[[r, c]] = g.get(r as i64 - c as i64) + g.get((r + c) as i64);
                }
            }
            op
        }
    }
}

#[derive(Debug, Clone)]
pub struct FineSpectrum {
    coeffs: Vec<Complex64>,
}

impl FineSpectrum {
    pub fn get(&self, j: i64) -> Complex64 {
        let n2 = self.coeffs.len() as i64;
        self.coeffs[j.rem_euclid(n2) as usize]
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for c in &mut self.coeffs {
            *c *= s;
        }
        self
    }
}

/// Writes the real 2x2 block of `delta -> a delta + b conj(delta)` acting on
/// `(re, im)` pairs.
#[inline]
pub fn add_real_block(dst: &mut Array2<f64>, row: usize, col: usize, a: Complex64, b: Complex64) {
    dst[[row, col]] += a.re + b.re;
    dst[[row, col + 1]] += -a.im + b.im;
    dst[[row + 1, col]] += a.im + b.im;
    dst[[row + 1, col + 1]] += a.re - b.re;
}

pub fn pack(a: &[Complex64], out: &mut [f64]) {
    for (i, c) in a.iter().enumerate() {
        out[2 * i] = c.re;
        out[2 * i + 1] = c.im;
    }
}

pub fn unpack(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}
