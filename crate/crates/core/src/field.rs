use num_complex::Complex64;

use crate::error::{Error, Result};

/// Periodic complex field sampled at `x_j = j L / n`, `j = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    length: f64,
    values: Vec<Complex64>,
}

/// True when `n` factors entirely into 2, 3, 5 and 7.
pub fn is_smooth_size(n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    for p in [2, 3, 5, 7] {
        while m.is_multiple_of(p) {
            m /= p;
        }
    }
    m == 1
}

pub(crate) fn check_grid(n: usize, length: f64) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidField(format!("domain length must be positive, got {length}")));
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidField(format!("grid size must be even, got {n}")));
    }
    if !is_smooth_size(n) {
        return Err(Error::InvalidField(format!(
            "grid size {n} is not a product of small primes"
        )));
    }
    Ok(())
}

impl ComplexField {
    pub fn new(length: f64, values: Vec<Complex64>) -> Result<Self> {
        check_grid(values.len(), length)?;
        Ok(Self { length, values })
    }

    pub fn zeros(n: usize, length: f64) -> Result<Self> {
        Self::new(length, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, length: f64, value: Complex64) -> Result<Self> {
        Self::new(length, vec![value; n])
    }

    /// Samples `f(x)` on the grid.
    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid(n, length)?;
        let dx = length / n as f64;
        Ok(Self { length, values: (0..n).map(|j| f(j as f64 * dx)).collect() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.len()).map(|j| j as f64 * dx).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            Some(j) => Err(Error::InvalidField(format!("non-finite sample at index {j}"))),
            None => Ok(()),
        }
    }

    /// Cyclic shift by `shift` samples: `out[j] = self[j - shift]`.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.len();
        let s = shift % n;
        let values = (0..n).map(|j| self.values[(j + n - s) % n]).collect();
        Self { length: self.length, values }
    }

    /// Rectangle-rule `L2` norm `sqrt(dx * sum |u|^2)`.
    pub fn l2(&self) -> f64 {
        (self.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.len() != self.len() {
            return Err(Error::Shape { expected: self.len(), got: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { length: self.length, values })
    }
}
