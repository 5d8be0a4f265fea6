//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use vnlw_core::{FourierGrid, SpectralField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field with modes `0 < |n|∞ ≤ kmax`, coefficient size `amp·e^{−|n|²/8}`.
pub fn smooth_field(grid: &Arc<FourierGrid>, seed: u64, amp: f64, kmax: i64) -> SpectralField {
    let mut r = rng(seed);
    let n = grid.n();
    let mut c = vec![C::new(0.0, 0.0); n * n];
    for k1 in -kmax..=kmax {
        for k2 in 0..=kmax {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let w = amp * (-((k1 * k1 + k2 * k2) as f64) / 8.0).exp();
            let z = C::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * w;
            let i = grid.index([k1, k2]).unwrap();
            let j = grid.index([-k1, -k2]).unwrap();
            c[i] = z;
            c[j] = z.conj();
        }
    }
    SpectralField::from_coeffs(grid, c, true).unwrap()
}

/// Random Hermitian field with independent Gaussian coefficients of size
/// `⟨n⟩^{−decay}` on every paired mode.
pub fn random_field(grid: &Arc<FourierGrid>, seed: u64, decay: f64) -> SpectralField {
    let mut r = rng(seed);
    let n = grid.n() as i64;
    let h = n / 2;
    let mut c = vec![C::new(0.0, 0.0); (n * n) as usize];
    for k1 in -h + 1..h {
        for k2 in 0..h {
            if k2 == 0 && k1 < 0 {
                continue;
            }
            let w = (1.0 + (k1 * k1 + k2 * k2) as f64).powf(-decay / 2.0);
            let i = grid.index([k1, k2]).unwrap();
            if k1 == 0 && k2 == 0 {
                c[i] = C::new(gauss(&mut r) * w, 0.0);
                continue;
            }
            let z = C::new(gauss(&mut r), gauss(&mut r)) * w;
            c[i] = z;
            c[grid.index([-k1, -k2]).unwrap()] = z.conj();
        }
    }
    SpectralField::from_coeffs(grid, c, true).unwrap()
}

pub fn gauss(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Frequencies along one FFT axis of length `n`.
fn freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Plain 2-D FFT by rows then columns.
fn fft2(data: &mut [C], m: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let f = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    for row in data.chunks_mut(m) {
        f.process(row);
    }
    let mut col = vec![C::new(0.0, 0.0); m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        f.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
}

/// `κ·u^3`-type power nonlinearity `|u|^{p−1}u` of coefficients given in FFT
/// order on an `n×n` lattice, evaluated on an `m×m` grid and truncated.
pub fn power_of_coeffs(c: &[C], n: usize, m: usize, p: f64) -> Vec<C> {
    let mut data = vec![C::new(0.0, 0.0); m * m];
    for i1 in 0..n {
        for i2 in 0..n {
            let (k1, k2) = (freq(i1, n), freq(i2, n));
            let p1 = k1.rem_euclid(m as i64) as usize;
            let p2 = k2.rem_euclid(m as i64) as usize;
            data[p1 * m + p2] = c[i1 * n + i2];
        }
    }
    fft2(&mut data, m, true);
    for z in data.iter_mut() {
        let x = z.re;
        *z = C::new(x.abs().powf(p - 1.0) * x, 0.0);
    }
    fft2(&mut data, m, false);
    let s = 1.0 / (m * m) as f64;
    let mut out = vec![C::new(0.0, 0.0); n * n];
    let h = (n / 2) as i64;
    for i1 in 0..n {
        for i2 in 0..n {
            let (k1, k2) = (freq(i1, n), freq(i2, n));
            if k1 == -h || k2 == -h {
                continue;
            }
            out[i1 * n + i2] = data[k1.rem_euclid(m as i64) as usize * m + k2.rem_euclid(m as i64) as usize] * s;
        }
    }
    out
}

/// Classical RK4 on the mode system
/// `v̂' = ŵ`, `ŵ' = −(1+|n|²)v̂ − c|n|ŵ − κ·(|v|^{p−1}v)^`,
/// with `c = 1` (viscous) or `0`. Returns `(v, ∂tv)` coefficients at each of `times`.
pub struct Rk4 {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub kappa: f64,
    pub viscous: bool,
}

impl Rk4 {
    fn rhs(&self, v: &[C], w: &[C]) -> (Vec<C>, Vec<C>) {
        let n = self.n;
        let f = if self.kappa != 0.0 { power_of_coeffs(v, n, self.m, self.p) } else { vec![C::new(0.0, 0.0); n * n] };
        let mut dw = vec![C::new(0.0, 0.0); n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let (k1, k2) = (freq(i1, n), freq(i2, n));
                let a2 = (k1 * k1 + k2 * k2) as f64;
                let i = i1 * n + i2;
                let damp = if self.viscous { a2.sqrt() } else { 0.0 };
                dw[i] = -v[i] * (1.0 + a2) - w[i] * damp - f[i] * self.kappa;
            }
        }
        (w.to_vec(), dw)
    }

    pub fn run(&self, v0: &[C], w0: &[C], dt: f64, times: &[f64]) -> Vec<(Vec<C>, Vec<C>)> {
        let mut v = v0.to_vec();
        let mut w = w0.to_vec();
        let mut t = 0.0;
        let mut out = Vec::new();
        let axpy = |a: &[C], b: &[C], s: f64| -> Vec<C> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
        for &target in times {
            while t < target - 1e-12 {
                let h = dt.min(target - t);
                let (a1, b1) = self.rhs(&v, &w);
                let (a2, b2) = self.rhs(&axpy(&v, &a1, h / 2.0), &axpy(&w, &b1, h / 2.0));
                let (a3, b3) = self.rhs(&axpy(&v, &a2, h / 2.0), &axpy(&w, &b2, h / 2.0));
                let (a4, b4) = self.rhs(&axpy(&v, &a3, h), &axpy(&w, &b3, h));
                for i in 0..v.len() {
                    v[i] += (a1[i] + a2[i] * 2.0 + a3[i] * 2.0 + a4[i]) * (h / 6.0);
                    w[i] += (b1[i] + b2[i] * 2.0 + b3[i] * 2.0 + b4[i]) * (h / 6.0);
                }
                t += h;
            }
            out.push((v.clone(), w.clone()));
        }
        out
    }
}

/// `(Σ ⟨n⟩²|v̂|² + |ŵ|²)^{1/2}`: the `H¹ × L²` distance used for solver checks.
pub fn h1_pair(v: &[C], w: &[C], n: usize) -> f64 {
    let mut s = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            let (k1, k2) = (freq(i1, n), freq(i2, n));
            let i = i1 * n + i2;
            s += (1.0 + (k1 * k1 + k2 * k2) as f64) * v[i].norm_sqr() + w[i].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn diff(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
