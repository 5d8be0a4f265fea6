//! Exact Gaussian sampling of the stochastic convolution
//! `Ψ(t) = ∫₀ᵗ S(t−t′) D^α dW(t′)` and of `∂tΨ`, mode by mode.
//!
//! Each mode pair `X = (Ψ̂, ∂tΨ̂)` is a two-dimensional complex Ornstein–Uhlenbeck
//! process, so `X(t+h) = M_n(h) X(t) + G` with `G` centred Gaussian of
//! covariance `Q_n(h) = |n|^{2α} ∫₀ʰ k(s) k(s)ᵀ ds`, `k = (m01, m11)`.
//! Real and imaginary parts each carry half of that covariance.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::{FourierGrid, C64};
use crate::propagators::{phi_functions, Damping, FlowMatrix, ModeSymbol};
use crate::quadrature;
use crate::rng::CounterRng;

/// Words of randomness consumed per mode per step.
const WORDS_PER_MODE: u64 = 4;

#[derive(Debug, Clone)]
pub struct NoiseState {
    grid: Arc<FourierGrid>,
    t: f64,
    alpha: f64,
    seed: u64,
    path: u64,
    step: u64,
    psi: SpectralField,
    dpsi: SpectralField,
    factors: Option<(u64, Arc<Vec<[[f64; 2]; 2]>>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NoiseManifest {
    pub seed: u64,
    pub path: u64,
    pub alpha: f64,
    pub n: usize,
    pub times: Vec<f64>,
}

pub fn init_noise(grid: &Arc<FourierGrid>, alpha: f64, seed: u64) -> Result<NoiseState> {
    NoiseState::new(grid, alpha, seed, 0)
}

impl NoiseState {
    /// Zero state at `t = 0` for sample path `path` of the seed.
    pub fn new(grid: &Arc<FourierGrid>, alpha: f64, seed: u64, path: u64) -> Result<Self> {
        if !(alpha < 0.5) || !alpha.is_finite() {
            return invalid(format!("α must be finite and < 1/2, got {alpha}"));
        }
        Ok(NoiseState {
            grid: grid.clone(),
            t: 0.0,
            alpha,
            seed,
            path,
            step: 0,
            psi: SpectralField::zeros(grid),
            dpsi: SpectralField::zeros(grid),
            factors: None,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn psi(&self) -> &SpectralField {
        &self.psi
    }

    pub fn dpsi(&self) -> &SpectralField {
        &self.dpsi
    }

    /// Exact update over `h`. The randomness of step `k` is drawn from stream `k`,
    /// at word offset `4·idx` for the representative with flat index `idx`.
    pub fn advance(&mut self, h: f64) -> Result<()> {
        if !(h > 0.0) || !h.is_finite() {
            return invalid(format!("step must be > 0, got {h}"));
        }
        let g = self.grid.clone();
        let mult = g.multipliers();
        let stream = self.step;
        let factors = match &self.factors {
            Some((bits, f)) if *bits == h.to_bits() => f.clone(),
            _ => {
                let f = Arc::new(
                    mult.d
                        .iter()
                        .map(|&d| step_factor(d, self.alpha, h))
                        .collect::<Result<Vec<_>>>()?,
                );
                self.factors = Some((h.to_bits(), f.clone()));
                f
            }
        };
        let mut rng: Option<(CounterRng, u64)> = None;
        let psi = self.psi.coeffs_mut_keep();
        let dpsi = self.dpsi.coeffs_mut_keep();
        for idx in 0..g.len() {
            if !g.is_representative(idx) {
                continue;
            }
            let d = mult.d[idx];
            let flow = FlowMatrix::viscous(d, h);
            let (x, y) = flow.apply(psi[idx], dpsi[idx]);
            let l = factors[idx];
            let target = WORDS_PER_MODE * idx as u64;
            let reuse = matches!(&rng, Some((_, pos)) if *pos <= target && target - *pos < 256);
            if !reuse {
                rng = Some((CounterRng::new(self.seed, self.path, stream, target), target));
            }
            let (r, pos) = rng.as_mut().expect("stream initialised");
            while *pos < target {
                r.next_u64();
                *pos += 1;
            }
            let (z1, z2) = r.normal_pair();
            let (z3, z4) = r.normal_pair();
            *pos += WORDS_PER_MODE;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let gre = [l[0][0] * z1 * s, (l[1][0] * z1 + l[1][1] * z2) * s];
            let gim = [l[0][0] * z3 * s, (l[1][0] * z3 + l[1][1] * z4) * s];
            let a = x + C64::new(gre[0], gim[0]);
            let b = y + C64::new(gre[1], gim[1]);
            psi[idx] = a;
            dpsi[idx] = b;
            let j = g.neg_index(idx);
            psi[j] = a.conj();
            dpsi[j] = b.conj();
        }
        self.t += h;
        self.step += 1;
        Ok(())
    }

    /// Advances by `k` equal steps covering `span`.
    pub fn advance_by(&mut self, span: f64, k: usize) -> Result<()> {
        let h = span / k.max(1) as f64;
        for _ in 0..k.max(1) {
            self.advance(h)?;
        }
        Ok(())
    }
}

/// Functional form of [`NoiseState::advance`].
pub fn advance_noise(state: &NoiseState, h: f64) -> Result<NoiseState> {
    let mut s = state.clone();
    s.advance(h)?;
    Ok(s)
}

/// `π_N Ψ`: keeps `|n| ≤ cut`.
pub fn truncate_noise(state: &NoiseState, cut: f64) -> SpectralField {
    state.psi.truncate(cut)
}

pub fn dt_psi(state: &NoiseState) -> SpectralField {
    state.dpsi.clone()
}

/// Closed-form step covariance `Q_n(h)` for a mode with `|n| = d` (zero at `d = 0`).
/// Short steps with `ωh < 10⁻²` use adaptive quadrature instead.
pub fn step_covariance(d: f64, alpha: f64, h: f64) -> Result<[[f64; 2]; 2]> {
    if d == 0.0 || h == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    let sym = ModeSymbol::new(d, Damping::Viscous);
    let (g, w) = (sym.gamma, sym.omega);
    if w * h < 1e-2 {
        return quadrature_covariance(d, alpha, h, h);
    }
    let weight = d.powf(2.0 * alpha);
    let a = 2.0 * g;
    let e0 = h * phi_functions(C64::new(-a * h, 0.0))[1].re;
    let cs = phi_functions(C64::new(-a * h, 2.0 * w * h))[1] * h;
    let iss = 0.5 * (e0 - cs.re);
    let icc = 0.5 * (e0 + cs.re);
    let isc = 0.5 * cs.im;
    let r = g / w;
    Ok(symmetric(
        weight * iss / (w * w),
        weight * (isc / w - r / w * iss),
        weight * (icc - 2.0 * r * isc + r * r * iss),
    ))
}

fn symmetric(a: f64, b: f64, c: f64) -> [[f64; 2]; 2] {
    [[a, b], [b, c]]
}

fn quadrature_covariance(d: f64, alpha: f64, t1: f64, t2: f64) -> Result<[[f64; 2]; 2]> {
    if d == 0.0 || t2 == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    let sym = ModeSymbol::new(d, Damping::Viscous);
    let weight = d.powf(2.0 * alpha);
    let k = |s: f64| {
        let f = FlowMatrix::from_symbol(sym, s);
        [f.m[0][1], f.m[1][1]]
    };
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let v = quadrature::integrate(|s| k(t1 - s)[i] * k(t2 - s)[j], 0.0, t2, 1e-15, 1e-12)?;
            out[i][j] = weight * v;
        }
    }
    Ok(out)
}

/// Cross-covariance `C_ij = E[X_i(t₁) conj X_j(t₂)]` of `X = (Ψ̂, ∂tΨ̂)` for mode `n`,
/// `0 ≤ t₂ ≤ t₁`, by adaptive quadrature of the Itô isometry. Symmetric PSD when
/// `t₁ = t₂`.
pub fn covariance_oracle(n: [i64; 2], t1: f64, t2: f64, alpha: f64) -> Result<[[f64; 2]; 2]> {
    if !(t2 >= 0.0 && t1 >= t2) {
        return invalid(format!("need 0 <= t2 <= t1, got t1={t1}, t2={t2}"));
    }
    let d = ((n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
    quadrature_covariance(d, alpha, t1, t2)
}

/// `E|Ψ̂(t₁,n) − Ψ̂(t₂,n)|² = I₁ + I₂`: `I₁` collects the noise on `[t₂, t₁]`,
/// `I₂` the change of the kernel acting on `[0, t₂]`.
pub fn increment_variance(n: [i64; 2], t1: f64, t2: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(t2 >= 0.0 && t1 >= t2) {
        return invalid(format!("need 0 <= t2 <= t1, got t1={t1}, t2={t2}"));
    }
    let d = ((n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
    if d == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sym = ModeSymbol::new(d, Damping::Viscous);
    let weight = d.powf(2.0 * alpha);
    let k = |s: f64| FlowMatrix::from_symbol(sym, s).m[0][1];
    let i1 = quadrature::integrate(|s| k(t1 - s).powi(2), t2, t1, 1e-15, 1e-12)?;
    let i2 = quadrature::integrate(|s| (k(t1 - s) - k(t2 - s)).powi(2), 0.0, t2, 1e-15, 1e-12)?;
    Ok((weight * i1, weight * i2))
}

/// Ratio `E|Ψ̂(t₁)−Ψ̂(t₂)|² / (|t₁−t₂|^σ ⟨n⟩^{−(3−2α−σ)})`.
pub fn increment_bound_ratio(n: [i64; 2], t1: f64, t2: f64, alpha: f64, sigma: f64) -> Result<f64> {
    let (i1, i2) = increment_variance(n, t1, t2, alpha)?;
    let jb = (1.0 + (n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
    Ok((i1 + i2) / ((t1 - t2).abs().powf(sigma) * jb.powf(-(3.0 - 2.0 * alpha - sigma))))
}

/// Lower-triangular factor of `Q` after flooring negative eigenvalues at zero.
pub fn psd_cholesky(q: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let (a, b, c) = (q[0][0], 0.5 * (q[0][1] + q[1][0]), q[1][1]);
    let tr = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (tr + disc, tr - disc);
    let (a, b, c) = if l2 < 0.0 {
        // Rebuild with the floored spectrum.
        let l1 = l1.max(0.0);
        if disc == 0.0 {
            (l1, 0.0, l1)
        } else {
            let (vx, vy) = if b.abs() > 0.0 { (b, l1 - a) } else if a >= c { (1.0, 0.0) } else { (0.0, 1.0) };
            let nrm = (vx * vx + vy * vy).sqrt();
            let (ux, uy) = (vx / nrm, vy / nrm);
            (l1 * ux * ux, l1 * ux * uy, l1 * uy * uy)
        }
    } else {
        (a, b, c)
    };
    if a <= 0.0 {
        return [[0.0, 0.0], [0.0, c.max(0.0).sqrt()]];
    }
    let l00 = a.sqrt();
    let l10 = b / l00;
    let l11 = (c - l10 * l10).max(0.0).sqrt();
    [[l00, 0.0], [l10, l11]]
}

fn step_factor(d: f64, alpha: f64, h: f64) -> Result<[[f64; 2]; 2]> {
    Ok(psd_cholesky(step_covariance(d, alpha, h)?))
}

/// Single-mode sampler: `(Ψ̂(t,n), ∂tΨ̂(t,n))` after the given steps, using the
/// same update and stream layout as the field sampler with slot `slot`.
pub fn sample_mode(d: f64, alpha: f64, seed: u64, path: u64, slot: u64, steps: &[f64]) -> Result<(C64, C64)> {
    let mut x = C64::new(0.0, 0.0);
    let mut y = C64::new(0.0, 0.0);
    for (k, &h) in steps.iter().enumerate() {
        if !(h > 0.0) {
            return invalid(format!("step must be > 0, got {h}"));
        }
        let flow = FlowMatrix::viscous(d, h);
        let (a, b) = flow.apply(x, y);
        let l = step_factor(d, alpha, h)?;
        let mut r = CounterRng::new(seed, path, k as u64, WORDS_PER_MODE * slot);
        let (z1, z2) = r.normal_pair();
        let (z3, z4) = r.normal_pair();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        x = a + C64::new(l[0][0] * z1, l[0][0] * z3) * s;
        y = b + C64::new(l[1][0] * z1 + l[1][1] * z2, l[1][0] * z3 + l[1][1] * z4) * s;
    }
    Ok((x, y))
}

/// Stationary-limit variances `(Var Ψ̂, Var ∂tΨ̂)` as `t → ∞`:
/// `|n|^{2α−1}/(2⟨n⟩²)` and `|n|^{2α−1}/2`.
pub fn stationary_variances(d: f64, alpha: f64) -> (f64, f64) {
    if d == 0.0 {
        return (0.0, 0.0);
    }
    let w = d.powf(2.0 * alpha - 1.0);
    (0.5 * w / (1.0 + d * d), 0.5 * w)
}
