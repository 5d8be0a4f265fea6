//! Spectral fields and the sample/coefficient transforms.
//!
//! Convention: `û(n) = mean_x u(x) e^{-i n·x}` over `x ∈ 2π(ℤ/N)²`, so the torus
//! has measure one and Parseval reads `Σ|û|² = mean |u|²`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{FourierGrid, C64};

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<FourierGrid>,
    coeffs: Vec<C64>,
    hermitian: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![C64::new(0.0, 0.0); grid.len()],
            hermitian: true,
        }
    }

    /// Wraps raw coefficients in FFT order. With `hermitian` set the field is
    /// projected onto real fields.
    pub fn from_coeffs(grid: &Arc<FourierGrid>, coeffs: Vec<C64>, hermitian: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        let mut f = SpectralField { grid: grid.clone(), coeffs, hermitian: false };
        if hermitian {
            f.project_real();
        }
        Ok(f)
    }

    /// Coefficients from a function of the frequency; no projection applied.
    pub fn from_fn(grid: &Arc<FourierGrid>, f: impl Fn([i64; 2]) -> C64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.mode(i))).collect();
        SpectralField { grid: grid.clone(), coeffs, hermitian: false }
    }

    /// `a e^{i k·x} + conj(a) e^{-i k·x}`.
    pub fn cosine_pair(grid: &Arc<FourierGrid>, k: [i64; 2], a: C64) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        let i = grid
            .index(k)
            .filter(|&i| grid.is_paired(i))
            .ok_or_else(|| Error::InvalidArgument(format!("mode {k:?} not on the paired lattice")))?;
        if k == [0, 0] {
            f.coeffs[i] = C64::new(2.0 * a.re, 0.0);
        } else {
            f.coeffs[i] += a;
            f.coeffs[grid.neg_index(i)] += a.conj();
        }
        Ok(f)
    }

    /// Exact DFT of complex samples on the N×N grid (all N² coefficients kept).
    pub fn from_samples(grid: &Arc<FourierGrid>, samples: &[C64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: samples.len() });
        }
        let mut data = samples.to_vec();
        grid.plan(grid.n()).forward(&mut data);
        let s = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
        Ok(SpectralField { grid: grid.clone(), coeffs: data, hermitian: false })
    }

    /// Transform of real samples projected onto Hermitian, Nyquist-free coefficients.
    pub fn from_real_samples(grid: &Arc<FourierGrid>, samples: &[f64]) -> Result<Self> {
        let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mut f = Self::from_samples(grid, &c)?;
        f.project_real();
        Ok(f)
    }

    /// Forward transform of `m×m` samples (consumed), truncated to the lattice.
    pub fn from_padded_samples(grid: &Arc<FourierGrid>, mut data: Vec<C64>, m: usize, real: bool) -> Self {
        assert_eq!(data.len(), m * m);
        grid.plan(m).forward(&mut data);
        let s = 1.0 / (m * m) as f64;
        let n = grid.n();
        let mut coeffs = vec![C64::new(0.0, 0.0); grid.len()];
        let h = (n / 2) as i64;
        for i1 in 0..n {
            let k1 = grid.freq(i1);
            if k1 == -h {
                continue;
            }
            let p1 = k1.rem_euclid(m as i64) as usize;
            for i2 in 0..n {
                let k2 = grid.freq(i2);
                if k2 == -h {
                    continue;
                }
                let p2 = k2.rem_euclid(m as i64) as usize;
                coeffs[i1 * n + i2] = data[p1 * m + p2] * s;
            }
        }
        let mut f = SpectralField { grid: grid.clone(), coeffs, hermitian: false };
        if real {
            f.project_real();
        }
        f
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Mutable access; clears the Hermitian flag unless the caller re-projects.
    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        self.hermitian = false;
        &mut self.coeffs
    }

    /// Mutable access for updates known to preserve the Hermitian structure.
    pub(crate) fn coeffs_mut_keep(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub(crate) fn set_hermitian_flag(&mut self, h: bool) {
        self.hermitian = h;
    }

    pub fn coeff(&self, k: [i64; 2]) -> C64 {
        self.grid.index(k).map(|i| self.coeffs[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Symmetrizes `c(n) ← (c(n) + conj c(-n))/2` and zeroes the Nyquist row/column.
    pub fn project_real(&mut self) {
        let g = self.grid.clone();
        for i in 0..g.len() {
            if !g.is_paired(i) {
                self.coeffs[i] = C64::new(0.0, 0.0);
                continue;
            }
            let j = g.neg_index(i);
            if j < i {
                continue;
            }
            if j == i {
                self.coeffs[i] = C64::new(self.coeffs[i].re, 0.0);
            } else {
                let a = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = a;
                self.coeffs[j] = a.conj();
            }
        }
        self.hermitian = true;
    }

    /// Checks Hermitian symmetry and zero Nyquist content to tolerance `tol`.
    pub fn check_hermitian(&self, tol: f64) -> bool {
        let g = &self.grid;
        (0..g.len()).all(|i| {
            if !g.is_paired(i) {
                self.coeffs[i].norm() <= tol
            } else {
                (self.coeffs[i] - self.coeffs[g.neg_index(i)].conj()).norm() <= tol
            }
        })
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    /// Samples on the N×N grid.
    pub fn to_samples(&self) -> Vec<C64> {
        let mut data = self.coeffs.clone();
        self.grid.plan(self.grid.n()).inverse(&mut data);
        data
    }

    /// Real parts of the N×N samples.
    pub fn to_real_samples(&self) -> Vec<f64> {
        self.to_samples().into_iter().map(|c| c.re).collect()
    }

    /// Samples on an `m×m` grid (`m ≥ N`) by zero padding.
    pub fn samples_padded(&self, m: usize) -> Vec<C64> {
        let n = self.grid.n();
        assert!(m >= n, "padded size {m} below lattice size {n}");
        if m == n {
            return self.to_samples();
        }
        let mut data = vec![C64::new(0.0, 0.0); m * m];
        for i1 in 0..n {
            let p1 = self.grid.freq(i1).rem_euclid(m as i64) as usize;
            for i2 in 0..n {
                let c = self.coeffs[i1 * n + i2];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let p2 = self.grid.freq(i2).rem_euclid(m as i64) as usize;
                data[p1 * m + p2] = c;
            }
        }
        self.grid.plan(m).inverse(&mut data);
        data
    }

    pub fn real_samples_padded(&self, m: usize) -> Vec<f64> {
        self.samples_padded(m).into_iter().map(|c| c.re).collect()
    }

    /// Multiplies mode `i` by `w(i)`. Radial real weights keep the field Hermitian.
    pub fn map_real(&self, w: impl Fn(usize) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * w(i)).collect();
        SpectralField { grid: self.grid.clone(), coeffs, hermitian: self.hermitian }
    }

    /// Multiplies mode `i` by a complex symbol; the result is not marked Hermitian.
    pub fn map_complex(&self, w: impl Fn(usize) -> C64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * w(i)).collect();
        SpectralField { grid: self.grid.clone(), coeffs, hermitian: false }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_real(|_| a)
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.hermitian = self.hermitian && other.hermitian;
    }

    /// `Σ |û(n)|²`, equal to the mean of |u|² by Parseval.
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Keeps modes with `|n| ≤ cut`.
    pub fn truncate(&self, cut: f64) -> Self {
        let c2 = cut * cut;
        let g = self.grid.clone();
        self.map_real(|i| if (g.abs2(i) as f64) <= c2 { 1.0 } else { 0.0 })
    }

    /// Largest coefficient difference in absolute value.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
