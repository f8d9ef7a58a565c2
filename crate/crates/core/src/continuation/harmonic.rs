//! Time-periodic solutions of the model PDE by harmonic balance:
//! `U(x, t) = sum_{j in H} U_j(x) e^{ijt}` over an odd, symmetric set `H`
//! (by default `{-3, -1, 1, 3}`), with the forcing `F` as parameter.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::Inverse;
use num_complex::Complex64;

use super::basis::{add_real_block, pack, unpack, EvenBasis, FineSpectrum};
use super::SteadyProblem;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::floquet::linalg_err;
use crate::model::ModelParams;

pub const DEFAULT_HARMONICS: [i64; 4] = [-3, -1, 1, 3];

#[derive(Debug, Clone)]
pub struct HarmonicPde {
    basis: EvenBasis,
    params: ModelParams,
    harmonics: Vec<i64>,
    time_points: usize,
}

fn validate_harmonics(h: &[i64]) -> Result<()> {
    let bad = |why: &str| Err(Error::Parameter(format!("inconsistent harmonic set {h:?}: {why}")));
    if h.is_empty() {
        return bad("empty");
    }
    if h.iter().any(|j| j % 2 == 0) {
        return bad("subharmonic response needs odd harmonics");
    }
    if h.windows(2).any(|w| w[0] >= w[1]) {
        return bad("must be strictly increasing");
    }
    if h.iter().any(|j| !h.contains(&-j)) {
        return bad("must contain -j with every j");
    }
    Ok(())
}

impl HarmonicPde {
    /// `params.forcing` is ignored; `F` is the continuation parameter.
    pub fn new(params: ModelParams, n: usize, length: f64, harmonics: &[i64]) -> Result<Self> {
        params.validate()?;
        validate_harmonics(harmonics)?;
        let hmax = harmonics.iter().map(|j| j.unsigned_abs() as usize).max().unwrap_or(1);
        // Cubic products reach 3 hmax; projection onto |j| <= hmax must not alias.
        let time_points = (4 * hmax + 1).next_power_of_two();
        Ok(Self { basis: EvenBasis::new(n, length)?, params, harmonics: harmonics.to_vec(), time_points })
    }

    pub fn basis(&self) -> &EvenBasis {
        &self.basis
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn harmonics(&self) -> &[i64] {
        &self.harmonics
    }

    fn slot(&self, j: i64) -> Option<usize> {
        self.harmonics.iter().position(|&h| h == j)
    }

    fn modes(&self) -> usize {
        self.basis.modes()
    }

    fn split(&self, x: &[f64]) -> Vec<Vec<Complex64>> {
        x.chunks_exact(2 * self.modes()).map(unpack).collect()
    }

    fn join(&self, parts: &[Vec<Complex64>]) -> Vec<f64> {
        let m = self.modes();
        let mut x = vec![0.0; self.dim()];
        for (i, p) in parts.iter().enumerate() {
            pack(p, &mut x[2 * m * i..2 * m * (i + 1)]);
        }
        x
    }

    /// State vector from per-harmonic profiles symmetric about `center`.
    /// Harmonics missing from `fields` are set to zero.
    pub fn encode(&self, fields: &[(i64, ComplexField)], center: f64) -> Result<Vec<f64>> {
        let mut parts = vec![vec![Complex64::new(0.0, 0.0); self.modes()]; self.harmonics.len()];
        for (j, f) in fields {
            let slot = self.slot(*j).ok_or_else(|| {
                Error::Parameter(format!("harmonic {j} is not in the retained set {:?}", self.harmonics))
            })?;
            parts[slot] = self.basis.project(f, center)?;
        }
        Ok(self.join(&parts))
    }

    /// Per-harmonic profiles centred at `L/2`.
    pub fn harmonic_fields(&self, x: &[f64]) -> Vec<(i64, ComplexField)> {
        self.harmonics.iter().zip(self.split(x)).map(|(&j, a)| (j, self.basis.centred_field(&a))).collect()
    }

    /// `U(x, t)` centred at `L/2`.
    pub fn reconstruct(&self, x: &[f64], t: f64) -> ComplexField {
        let parts = self.split(x);
        let m = self.modes();
        let a: Vec<Complex64> = (0..m)
            .map(|k| self.harmonics.iter().zip(&parts).map(|(&j, p)| p[k] * Complex64::from_polar(1.0, j as f64 * t)).sum())
            .collect();
        self.basis.centred_field(&a)
    }

    /// `|U_j|` at the point farthest from the centre, maximised over `j`.
    pub fn edge_amplitude(&self, x: &[f64]) -> f64 {
        let half = self.basis.n() / 2;
        self.split(x).iter().map(|a| self.basis.values(a)[half].norm()).fold(0.0, f64::max)
    }

    /// Per-harmonic norms `sqrt(2 <|U_j|^2>)`.
    pub fn harmonic_norms(&self, x: &[f64]) -> Vec<(i64, f64)> {
        self.harmonics.iter().zip(self.split(x)).map(|(&j, a)| (j, (2.0 * self.basis.mean_square(&a)).sqrt())).collect()
    }

    /// Time samples of `U` on the fine grid, one vector per time point.
    fn time_samples(&self, parts: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let fine: Vec<Vec<Complex64>> = parts.iter().map(|a| self.basis.fine_values(a)).collect();
        let n2 = 2 * self.basis.n();
        (0..self.time_points)
            .map(|s| {
                let t = 2.0 * PI * s as f64 / self.time_points as f64;
                let mut u = vec![Complex64::new(0.0, 0.0); n2];
                for (&j, f) in self.harmonics.iter().zip(&fine) {
                    let e = Complex64::from_polar(1.0, j as f64 * t);
                    for (ui, fi) in u.iter_mut().zip(f) {
                        *ui += e * fi;
                    }
                }
                u
            })
            .collect()
    }

    /// Time harmonic `q` of fine-grid samples `g(x, t_s)`.
    fn time_harmonic(&self, samples: &[Vec<Complex64>], q: i64) -> Vec<Complex64> {
        let mt = self.time_points as f64;
        let mut acc = vec![Complex64::new(0.0, 0.0); samples[0].len()];
        for (s, g) in samples.iter().enumerate() {
            let e = Complex64::from_polar(1.0 / mt, -(q as f64) * 2.0 * PI * s as f64 / mt);
            for (a, v) in acc.iter_mut().zip(g) {
                *a += e * v;
            }
        }
        acc
    }

    fn linear_symbol(&self, j: i64, m: usize) -> Complex64 {
        let k2 = self.basis.wavenumber(m).powi(2);
        let p = &self.params;
        Complex64::new(p.mu - p.alpha * k2, p.omega - j as f64 - p.beta * k2)
    }

    /// Harmonic `q` of `Re U`: `(U_q + conj(U_{-q})) / 2`.
    fn real_part_harmonic(&self, parts: &[Vec<Complex64>], q: i64) -> Option<Vec<Complex64>> {
        let a = self.slot(q)?;
        let b = self.slot(-q)?;
        Some(parts[a].iter().zip(&parts[b]).map(|(u, v)| 0.5 * (u + v.conj())).collect())
    }

    fn forcing_term(&self, parts: &[Vec<Complex64>], j: i64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.modes()];
        for q in [j - 2, j + 2] {
            if let Some(r) = self.real_part_harmonic(parts, q) {
                for (o, v) in out.iter_mut().zip(r) {
                    *o += Complex64::new(0.0, 0.5) * v;
                }
            }
        }
        out
    }
}

impl SteadyProblem for HarmonicPde {
    fn dim(&self) -> usize {
        2 * self.modes() * self.harmonics.len()
    }

    fn residual(&self, x: &[f64], forcing: f64) -> Vec<f64> {
        let parts = self.split(x);
        let c = self.params.cubic();
        let mut samples = self.time_samples(&parts);
        for u in samples.iter_mut().flatten() {
            *u = c * u.norm_sqr() * *u;
        }
        let res: Vec<Vec<Complex64>> = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let cub = self.basis.from_fine(&self.time_harmonic(&samples, j));
                let drive = self.forcing_term(&parts, j);
                (0..self.modes())
                    .map(|m| self.linear_symbol(j, m) * parts[i][m] + cub[m] + forcing * drive[m])
                    .collect()
            })
            .collect();
        self.join(&res)
    }

    fn residual_size(&self, r: &[f64]) -> f64 {
        self.split(r)
            .iter()
            .flat_map(|a| self.basis.values(a))
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn jacobian(&self, x: &[f64], forcing: f64) -> Array2<f64> {
        let parts = self.split(x);
        let c = self.params.cubic();
        let samples = self.time_samples(&parts);
        let g: Vec<Vec<Complex64>> = samples.iter().map(|u| u.iter().map(|v| 2.0 * c * v.norm_sqr()).collect()).collect();
        let h: Vec<Vec<Complex64>> = samples.iter().map(|u| u.iter().map(|v| c * v * v).collect()).collect();
        let hmax = self.harmonics.iter().map(|j| j.abs()).max().unwrap_or(0);
        let spectrum = |s: &[Vec<Complex64>], q: i64| -> FineSpectrum { self.basis.fine_spectrum(&self.time_harmonic(s, q)) };
        let gq: Vec<Array2<Complex64>> = (-2 * hmax..=2 * hmax)
            .map(|q| self.basis.multiplication_operator(&spectrum(&g, q), false))
            .collect();
        let hq: Vec<Array2<Complex64>> = (-2 * hmax..=2 * hmax)
            .map(|q| self.basis.multiplication_operator(&spectrum(&h, q), false))
            .collect();
        let idx = |q: i64| (q + 2 * hmax) as usize;

        let m = self.modes();
        let nh = self.harmonics.len();
        let mut jac = Array2::<f64>::zeros((2 * m * nh, 2 * m * nh));
        let quarter = Complex64::new(0.0, 0.25 * forcing);
        for (bi, &j) in self.harmonics.iter().enumerate() {
            for (bj, &jp) in self.harmonics.iter().enumerate() {
                let a_op = &gq[idx(j - jp)];
                let b_op = &hq[idx(j + jp)];
                // Forcing couples j to j +- 2 directly and through conj(U_{-(j +- 2)}).
                let a_force = if jp == j - 2 || jp == j + 2 { quarter } else { Complex64::new(0.0, 0.0) };
                let b_force = if jp == 2 - j || jp == -j - 2 { quarter } else { Complex64::new(0.0, 0.0) };
                let (r0, c0) = (2 * m * bi, 2 * m * bj);
                for r in 0..m {
                    for col in 0..m {
                        let mut av = a_op[[r, col]];
                        let mut bv = b_op[[r, col]];
                        if r == col {
                            av += a_force;
                            bv += b_force;
                            if bi == bj {
                                av += self.linear_symbol(j, r);
                            }
                        }
                        add_real_block(&mut jac, r0 + 2 * r, c0 + 2 * col, av, bv);
                    }
                }
            }
        }
        jac
    }

    fn param_derivative(&self, x: &[f64], _forcing: f64) -> Vec<f64> {
        let parts = self.split(x);
        let d: Vec<Vec<Complex64>> = self.harmonics.iter().map(|&j| self.forcing_term(&parts, j)).collect();
        self.join(&d)
    }

    /// Time-averaged norm `sqrt((2/L) <int |U|^2 dx>_t)`.
    fn norm(&self, x: &[f64]) -> f64 {
        (2.0 * self.split(x).iter().map(|a| self.basis.mean_square(a)).sum::<f64>()).sqrt()
    }

    fn weights(&self) -> Vec<f64> {
        let m = self.modes();
        let mut w = vec![4.0; self.dim()];
        for i in 0..self.harmonics.len() {
            w[2 * m * i] = 2.0;
            w[2 * m * i + 1] = 2.0;
        }
        w
    }
}

/// Least-squares fit of snapshots `(t_s, U(., t_s))` by `sum_{j in H} U_j e^{ijt}`.
pub fn project_snapshots(snapshots: &[(f64, ComplexField)], harmonics: &[i64]) -> Result<Vec<(i64, ComplexField)>> {
    validate_harmonics(harmonics)?;
    let s = snapshots.len();
    let h = harmonics.len();
    if s < h {
        return Err(Error::Shape { expected: h, got: s });
    }
    let n = snapshots[0].1.len();
    let length = snapshots[0].1.length();
    if let Some((_, bad)) = snapshots.iter().find(|(_, f)| f.len() != n) {
        return Err(Error::Shape { expected: n, got: bad.len() });
    }
    // Normal equations E^H E c = E^H y with E_{s,j} = e^{i j t_s}.
    let e = |si: usize, j: usize| Complex64::from_polar(1.0, harmonics[j] as f64 * snapshots[si].0);
    let mut gram = Array2::<Complex64>::zeros((h, h));
    for a in 0..h {
        for b in 0..h {
            gram[[a, b]] = (0..s).map(|si| e(si, a).conj() * e(si, b)).sum();
        }
    }
    let inv = gram.inv().map_err(linalg_err)?;
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; h];
    for p in 0..n {
        let rhs: Vec<Complex64> = (0..h).map(|a| (0..s).map(|si| e(si, a).conj() * snapshots[si].1.values()[p]).sum()).collect();
        for a in 0..h {
            out[a][p] = (0..h).map(|b| inv[[a, b]] * rhs[b]).sum();
        }
    }
    harmonics
        .iter()
        .zip(out)
        .map(|(&j, v)| Ok((j, ComplexField::new(length, v)?)))
        .collect()
}
