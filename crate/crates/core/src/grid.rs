//! Frequency lattice, per-mode multiplier tables and cached FFT plans.
//!
//! Coefficients live in FFT order: flat index `i1 * N + i2`, where axis index
//! `i` carries frequency `i` for `i < N/2` and `i - N` otherwise. The row and
//! column with frequency `-N/2` have no Hermitian partner and are kept at zero
//! by every operation that produces a real field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Square two-dimensional FFT of side `m`, built from batched row transforms.
pub struct Fft2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(planner: &mut FftPlanner<f64>, m: usize) -> Self {
        Fft2 {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Unnormalized forward transform, sign convention e^{-i k x}.
    pub fn forward(&self, data: &mut [C64]) {
        self.run(&*self.fwd, data);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&self, data: &mut [C64]) {
        self.run(&*self.inv, data);
    }

    fn run(&self, fft: &dyn Fft<f64>, data: &mut [C64]) {
        assert_eq!(data.len(), self.m * self.m);
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        transpose(data, self.m);
        fft.process_with_scratch(data, &mut scratch);
        transpose(data, self.m);
    }
}

fn transpose(data: &mut [C64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Per-mode symbols: `d = |n|`, `jb = (1+|n|²)^{1/2}`, `jbb = (1 + ¾|n|²)^{1/2}`.
#[derive(Debug, Clone)]
pub struct ModeMultipliers {
    pub d: Vec<f64>,
    pub jb: Vec<f64>,
    pub jbb: Vec<f64>,
    pub abs2: Vec<i64>,
}

pub struct FourierGrid {
    n: usize,
    pad: f64,
    m: usize,
    mult: ModeMultipliers,
    plans: Mutex<HashMap<usize, Arc<Fft2>>>,
    tables: RwLock<HashMap<(u64, u8), Arc<Vec<[f64; 4]>>>>,
}

const TABLE_CACHE_LIMIT: usize = 512;

impl std::fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("pad", &self.pad)
            .field("m", &self.m)
            .finish()
    }
}

/// Physical resolution for a padding factor: `⌈pad·N⌉`, rounded up to even.
pub fn padded_size(n: usize, pad: f64) -> usize {
    let m = (pad * n as f64 - 1e-9).ceil() as usize;
    let m = m.max(n);
    m + (m % 2)
}

pub fn make_grid(n: usize, pad: f64) -> Result<Arc<FourierGrid>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("N must be even and >= 4, got {n}")));
    }
    if !(pad >= 1.0) || !pad.is_finite() {
        return Err(Error::InvalidGrid(format!("pad factor must be >= 1, got {pad}")));
    }
    let len = n * n;
    let mut mult = ModeMultipliers {
        d: vec![0.0; len],
        jb: vec![0.0; len],
        jbb: vec![0.0; len],
        abs2: vec![0; len],
    };
    for i1 in 0..n {
        for i2 in 0..n {
            let k1 = axis_freq(i1, n);
            let k2 = axis_freq(i2, n);
            let a2 = k1 * k1 + k2 * k2;
            let idx = i1 * n + i2;
            mult.abs2[idx] = a2;
            mult.d[idx] = (a2 as f64).sqrt();
            mult.jb[idx] = (1.0 + a2 as f64).sqrt();
            mult.jbb[idx] = (1.0 + 0.75 * a2 as f64).sqrt();
        }
    }
    Ok(Arc::new(FourierGrid {
        n,
        pad,
        m: padded_size(n, pad),
        mult,
        plans: Mutex::new(HashMap::new()),
        tables: RwLock::new(HashMap::new()),
    }))
}

#[inline]
fn axis_freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl FourierGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pad(&self) -> f64 {
        self.pad
    }

    /// Padded physical resolution used for nonlinear products and L^r quadrature.
    pub fn padded(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multipliers(&self) -> &ModeMultipliers {
        &self.mult
    }

    #[inline]
    pub fn freq(&self, i: usize) -> i64 {
        axis_freq(i, self.n)
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 2] {
        [self.freq(idx / self.n), self.freq(idx % self.n)]
    }

    /// Flat index of frequency `k`, if it lies on the lattice.
    pub fn index(&self, k: [i64; 2]) -> Option<usize> {
        let h = (self.n / 2) as i64;
        if k[0] < -h || k[0] >= h || k[1] < -h || k[1] >= h {
            return None;
        }
        let n = self.n as i64;
        let i1 = k[0].rem_euclid(n) as usize;
        let i2 = k[1].rem_euclid(n) as usize;
        Some(i1 * self.n + i2)
    }

    /// False on the unpaired `-N/2` row and column.
    #[inline]
    pub fn is_paired(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n != h && idx % self.n != h
    }

    /// Flat index of `-n` for a paired mode.
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        let i1 = idx / n;
        let i2 = idx % n;
        ((n - i1) % n) * n + (n - i2) % n
    }

    /// Membership in the half-lattice `(ℤ₊×{0}) ∪ (ℤ×ℤ₊)` of pair representatives.
    #[inline]
    pub fn is_representative(&self, idx: usize) -> bool {
        if !self.is_paired(idx) {
            return false;
        }
        let [k1, k2] = self.mode(idx);
        k2 > 0 || (k2 == 0 && k1 > 0)
    }

    /// Flat indices of all pair representatives in increasing order.
    pub fn representatives(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_representative(i)).collect()
    }

    #[inline]
    pub fn abs_n(&self, idx: usize) -> f64 {
        self.mult.d[idx]
    }

    #[inline]
    pub fn bracket(&self, idx: usize) -> f64 {
        self.mult.jb[idx]
    }

    #[inline]
    pub fn jbb(&self, idx: usize) -> f64 {
        self.mult.jbb[idx]
    }

    #[inline]
    pub fn abs2(&self, idx: usize) -> i64 {
        self.mult.abs2[idx]
    }

    /// Largest |n|² on the lattice.
    pub fn max_abs2(&self) -> i64 {
        let h = (self.n / 2) as i64;
        2 * h * h
    }

    /// Cached FFT plan of side `m`.
    pub fn plan(&self, m: usize) -> Arc<Fft2> {
        let mut plans = self.plans.lock().expect("fft plan cache poisoned");
        plans
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft2::new(&mut planner, m))
            })
            .clone()
    }

    /// Per-mode 4-entry table keyed by `(t, kind)`, built once and shared.
    pub fn cached_table(&self, t: f64, kind: u8, build: impl FnOnce() -> Vec<[f64; 4]>) -> Arc<Vec<[f64; 4]>> {
        let key = (t.to_bits(), kind);
        if let Some(t) = self.tables.read().expect("table cache poisoned").get(&key) {
            return t.clone();
        }
        let table = Arc::new(build());
        let mut w = self.tables.write().expect("table cache poisoned");
        if w.len() >= TABLE_CACHE_LIMIT {
            w.clear();
        }
        w.entry(key).or_insert(table).clone()
    }

    pub fn same_as(&self, other: &FourierGrid) -> bool {
        self.n == other.n
    }
}
