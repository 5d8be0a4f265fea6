//! Nonlinear dynamics of the residual `v` in `u = v + f`, where `f` is the
//! stochastic convolution, a randomized linear evolution, or zero:
//!
//! ```text
//! v(t) = V(t)(v₀, v₁) + ∫₀ᵗ S(t−t′) N(t′) dt′,   N = −κ|v+f|^{p−1}(v+f),
//! ```
//!
//! with `κ = 1` (defocusing), `−1` (focusing) or `0` (linear).

mod etd;
mod picard;
mod run;

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{padded_size, FourierGrid, C64};
use crate::noise::NoiseState;
use crate::propagators::Damping;
use crate::randomize::{evaluate_z, RandomizedData};
use crate::verify::exponents::lwp_triple;

pub use etd::{step_etd, EtdStepper};
pub use picard::{fit_contraction_exponent, picard_window, PicardOutcome, WindowDiagnostics};
pub use run::{global_run, RunStatus, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Defocusing,
    Focusing,
    /// Nonlinear term switched off.
    Linear,
}

impl Sign {
    /// `κ` in `N = −κ F(u)`.
    pub fn coefficient(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
            Sign::Linear => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Picard iteration on windows of length `t_loc`.
    #[default]
    Picard,
    /// Two-stage exponential integrator with step `h`.
    Etd,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub sign: Sign,
    #[serde(default)]
    pub damping: Damping,
    #[serde(default)]
    pub integrator: Integrator,
    /// Window length for Picard runs.
    pub t_loc: f64,
    /// Node spacing inside a window, and step of the exponential integrator.
    pub h: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Working regularity of the contraction metric.
    pub sigma: f64,
    pub q: f64,
    pub r: f64,
    /// Padding factor for evaluating the nonlinearity.
    pub pad: f64,
    /// Pair `H^σ` norm that stops a run.
    pub overflow: f64,
    pub window_floor: f64,
    /// Spacing of recorded states and energies.
    pub cadence: f64,
}

/// `max(3/2, ⌈(p+1)/2⌉)`: exact for odd integer powers.
pub fn dealias_pad(p: f64) -> f64 {
    ((p + 1.0) / 2.0).ceil().max(1.5)
}

impl SolverConfig {
    /// Defaults with `(q, r, σ)` from the local theory at `δ = 0.1`.
    pub fn new(p: f64, sign: Sign) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return invalid(format!("p must exceed 1, got {p}"));
        }
        let (q, r, sigma) = lwp_triple(p, 0.1);
        Ok(SolverConfig {
            p,
            sign,
            damping: Damping::Viscous,
            integrator: Integrator::Picard,
            t_loc: 0.1,
            h: 0.005,
            picard_tol: 1e-10,
            picard_max: 60,
            sigma,
            q,
            r,
            pad: dealias_pad(p),
            overflow: 1e8,
            window_floor: 2f64.powi(-16),
            cadence: 0.1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {x}"))
            }
        };
        if !(self.p > 1.0) || !self.p.is_finite() {
            return invalid(format!("p must exceed 1, got {}", self.p));
        }
        pos("t_loc", self.t_loc)?;
        pos("h", self.h)?;
        pos("picard_tol", self.picard_tol)?;
        pos("overflow", self.overflow)?;
        pos("window_floor", self.window_floor)?;
        pos("cadence", self.cadence)?;
        if self.picard_max == 0 {
            return invalid("picard_max must be at least 1");
        }
        if !(self.q >= 1.0) || !(self.r >= 1.0) {
            return invalid(format!("q, r must be >= 1, got ({}, {})", self.q, self.r));
        }
        if !self.sigma.is_finite() {
            return invalid("σ must be finite");
        }
        if self.p.fract() == 0.0 && self.pad < dealias_pad(self.p) - 1e-12 {
            return invalid(format!("pad {} below the alias-free pad {} for p = {}", self.pad, dealias_pad(self.p), self.p));
        }
        if !(self.pad >= 1.0) {
            return invalid(format!("pad must be >= 1, got {}", self.pad));
        }
        Ok(())
    }
}

/// `|u|^{p−1}u` sampled on the `⌈pad·N⌉` grid and truncated back to the lattice.
pub fn nonlinearity(u: &SpectralField, p: f64, pad: f64) -> Result<SpectralField> {
    if !u.is_hermitian() {
        return invalid("nonlinearity needs a Hermitian field");
    }
    let g = u.grid();
    let m = padded_size(g.n(), pad);
    let mut s = u.samples_padded(m);
    let odd = p.fract() == 0.0 && (p as i64) % 2 == 1 && p < 64.0;
    for c in s.iter_mut() {
        let x = c.re;
        let y = if odd { x.powi(p as i32) } else { x.abs().powf(p - 1.0) * x };
        *c = C64::new(y, 0.0);
    }
    if s.iter().any(|c| !c.re.is_finite()) {
        return Err(Error::NonFinite("nonlinearity"));
    }
    Ok(SpectralField::from_padded_samples(g, s, m, true))
}

/// Ψ on the step grid `k·h`, generated lazily and kept until released.
#[derive(Debug, Clone)]
pub struct StochasticForcing {
    noise: NoiseState,
    h: f64,
    first: u64,
    cache: VecDeque<SpectralField>,
}

impl StochasticForcing {
    pub fn new(grid: &Arc<FourierGrid>, alpha: f64, seed: u64, path: u64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return invalid(format!("noise step must be positive, got {h}"));
        }
        let noise = NoiseState::new(grid, alpha, seed, path)?;
        let mut cache = VecDeque::new();
        cache.push_back(noise.psi().clone());
        Ok(StochasticForcing { noise, h, first: 0, cache })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn alpha(&self) -> f64 {
        self.noise.alpha()
    }

    /// Ψ at step `k`.
    pub fn at_step(&mut self, k: u64) -> Result<SpectralField> {
        if k < self.first {
            return invalid(format!("noise step {k} already released"));
        }
        while self.first + (self.cache.len() as u64) <= k {
            self.noise.advance(self.h)?;
            self.cache.push_back(self.noise.psi().clone());
        }
        Ok(self.cache[(k - self.first) as usize].clone())
    }

    /// Drops snapshots before step `k`.
    pub fn release_before(&mut self, k: u64) {
        while self.first < k && self.cache.len() > 1 {
            self.cache.pop_front();
            self.first += 1;
        }
    }

    /// Step index of `t`, if `t` lies on the step grid.
    pub fn step_of(&self, t: f64) -> Result<u64> {
        let k = (t / self.h).round();
        if (t - k * self.h).abs() > 1e-9 * self.h.max(t) || k < 0.0 {
            return invalid(format!("time {t} is off the noise step grid (h = {})", self.h));
        }
        Ok(k as u64)
    }
}

/// The additive term `f` in `u = v + f`.
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    Stochastic(StochasticForcing),
    Randomized(Box<RandomizedData>),
}

impl Forcing {
    /// `f(t)`, or `None` when the forcing vanishes.
    pub fn sample(&mut self, t: f64) -> Result<Option<SpectralField>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Stochastic(s) => {
                let k = s.step_of(t)?;
                s.at_step(k).map(Some)
            }
            Forcing::Randomized(d) => evaluate_z(d, t, false).map(Some),
        }
    }

    /// Smallest admissible window: forcing sampled on a step grid cannot be
    /// resolved below its step.
    pub fn min_window(&self, floor: f64) -> f64 {
        match self {
            Forcing::Stochastic(s) => s.h().max(floor),
            _ => floor,
        }
    }

    pub(crate) fn release_before(&mut self, t: f64) {
        if let Forcing::Stochastic(s) = self {
            if let Ok(k) = s.step_of(t) {
                s.release_before(k);
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Forcing::Stochastic(_))
    }
}

/// `N = −κ F(v + f)`.
pub(crate) fn nonlinear_term(v: &SpectralField, f: Option<&SpectralField>, cfg: &SolverConfig) -> Result<SpectralField> {
    let k = cfg.sign.coefficient();
    if k == 0.0 {
        return Ok(SpectralField::zeros(v.grid()));
    }
    let u = match f {
        Some(f) => v.add(f),
        None => v.clone(),
    };
    Ok(nonlinearity(&u, cfg.p, cfg.pad)?.scale(-k))
}
