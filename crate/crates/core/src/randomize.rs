//! Randomized initial data `û_j^ω(n) = g_{n,j} û_j(n)` and the linear
//! evolutions `z = V(t)(u₀^ω, u₁^ω)`, `z̃ = ⟨∇⟩^{−1}∂t z`.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{FourierGrid, C64};
use crate::norms;
use crate::propagators::{flow_table, Damping};
use crate::rng::{CounterRng, STREAM_FIXTURE, STREAM_RANDOMIZE};

/// Multiplier laws; all normalized to `E g = 0`, `E|g|² = 1`, `g₀` real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Gaussian,
    Bernoulli,
    UniformCompact,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "bernoulli" => Ok(Distribution::Bernoulli),
            "uniform-compact" | "uniform" => Ok(Distribution::UniformCompact),
            other => invalid(format!("unsupported distribution '{other}'")),
        }
    }
}

impl Distribution {
    /// One multiplier; `real` selects the zero-mode law. Consumes at most two words.
    pub fn draw(self, rng: &mut CounterRng, real: bool) -> C64 {
        match self {
            Distribution::Gaussian => {
                let (a, b) = rng.normal_pair();
                if real {
                    C64::new(a, 0.0)
                } else {
                    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
                }
            }
            Distribution::Bernoulli => C64::new(rng.sign(), 0.0),
            Distribution::UniformCompact => {
                let a = 2.0 * rng.uniform() - 1.0;
                if real {
                    C64::new(3f64.sqrt() * a, 0.0)
                } else {
                    let b = 2.0 * rng.uniform() - 1.0;
                    C64::new(a, b) * 1.5f64.sqrt()
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomizedData {
    pub base: (SpectralField, SpectralField),
    pub dist: Distribution,
    pub seed: u64,
    pub draw: u64,
    /// Realized multipliers for the two components, full lattice.
    pub g: (Vec<C64>, Vec<C64>),
    pub u0: SpectralField,
    pub u1: SpectralField,
}

pub fn randomize_data(u0: &SpectralField, u1: &SpectralField, dist: Distribution, seed: u64) -> Result<RandomizedData> {
    randomize_draw(u0, u1, dist, seed, 0)
}

/// Draw number `draw` of the randomization; draws are independent across `draw`.
pub fn randomize_draw(
    u0: &SpectralField,
    u1: &SpectralField,
    dist: Distribution,
    seed: u64,
    draw: u64,
) -> Result<RandomizedData> {
    u0.check_grid(u1)?;
    for (name, f) in [("u0", u0), ("u1", u1)] {
        let scale = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !f.check_hermitian(1e-12 * scale.max(1e-300)) {
            return invalid(format!("base data {name} is not Hermitian"));
        }
    }
    let g = u0.grid().clone();
    let mut g0 = vec![C64::new(0.0, 0.0); g.len()];
    let mut g1 = vec![C64::new(0.0, 0.0); g.len()];
    for idx in 0..g.len() {
        let zero = g.abs2(idx) == 0;
        if !(zero || g.is_representative(idx)) {
            continue;
        }
        let mut rng = CounterRng::new(seed, draw, STREAM_RANDOMIZE, 4 * idx as u64);
        let a = dist.draw(&mut rng, zero);
        let mut rng = CounterRng::new(seed, draw, STREAM_RANDOMIZE, 4 * idx as u64 + 2);
        let b = dist.draw(&mut rng, zero);
        g0[idx] = a;
        g1[idx] = b;
        if !zero {
            let j = g.neg_index(idx);
            g0[j] = a.conj();
            g1[j] = b.conj();
        }
    }
    let apply = |f: &SpectralField, m: &[C64]| -> Result<SpectralField> {
        let c: Vec<C64> = f.coeffs().iter().zip(m).map(|(a, b)| a * b).collect();
        SpectralField::from_coeffs(&g, c, true)
    };
    Ok(RandomizedData {
        u0: apply(u0, &g0)?,
        u1: apply(u1, &g1)?,
        base: (u0.clone(), u1.clone()),
        dist,
        seed,
        draw,
        g: (g0, g1),
    })
}

/// `z(t)`, or `z̃(t) = ⟨∇⟩^{−1}∂t z(t)` when `derivative_weighted`.
pub fn evaluate_z(data: &RandomizedData, t: f64, derivative_weighted: bool) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return invalid(format!("time must be >= 0, got {t}"));
    }
    let g = data.u0.grid();
    let table = flow_table(g, t, Damping::Viscous);
    let jb = &g.multipliers().jb;
    let a = data.u0.coeffs();
    let b = data.u1.coeffs();
    let c: Vec<C64> = (0..g.len())
        .map(|i| {
            let m = table[i];
            if derivative_weighted {
                (a[i] * m[2] + b[i] * m[3]) / jb[i]
            } else {
                a[i] * m[0] + b[i] * m[1]
            }
        })
        .collect();
    let mut z = SpectralField::from_coeffs(g, c, false)?;
    z.set_hermitian_flag(true);
    Ok(z)
}

/// Coefficient decay profiles for fixture data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecayProfile {
    /// `|û₀| = ⟨n⟩^{−1−s−ε}`, `|û₁| = ⟨n⟩^{−s−ε}`: in `H^s × H^{s−1}` and no better.
    Threshold { epsilon: f64 },
    /// `|û₀| = ⟨n⟩^{−κ}`, `|û₁| = ⟨n⟩^{1−κ}`.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub s_target: f64,
    pub profile: DecayProfile,
    pub seed: u64,
    /// Pair norm in `H^{s_target} × H^{s_target−1}` after normalization.
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Set to zero the velocity component.
    #[serde(default)]
    pub position_only: bool,
}

fn unit() -> f64 {
    1.0
}

/// Random-phase data pair with the requested decay, Hermitian and normalized.
pub fn fixture_pair(grid: &Arc<FourierGrid>, spec: &FixtureSpec) -> Result<(SpectralField, SpectralField)> {
    let (e0, e1) = match spec.profile {
        DecayProfile::Threshold { epsilon } => (1.0 + spec.s_target + epsilon, spec.s_target + epsilon),
        DecayProfile::Power { exponent } => (exponent, exponent - 1.0),
    };
    let mut c0 = vec![C64::new(0.0, 0.0); grid.len()];
    let mut c1 = vec![C64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        let zero = grid.abs2(idx) == 0;
        if !(zero || grid.is_representative(idx)) {
            continue;
        }
        let jb = grid.bracket(idx);
        let mut rng = CounterRng::new(spec.seed, 0, STREAM_FIXTURE, 2 * idx as u64);
        let (th0, th1) = (std::f64::consts::TAU * rng.uniform(), std::f64::consts::TAU * rng.uniform());
        let (a, b) = if zero {
            (C64::new(jb.powf(-e0), 0.0), C64::new(jb.powf(-e1), 0.0))
        } else {
            (C64::from_polar(jb.powf(-e0), th0), C64::from_polar(jb.powf(-e1), th1))
        };
        c0[idx] = a;
        c1[idx] = if spec.position_only { C64::new(0.0, 0.0) } else { b };
        if !zero {
            let j = grid.neg_index(idx);
            c0[j] = c0[idx].conj();
            c1[j] = c1[idx].conj();
        }
    }
    let u0 = SpectralField::from_coeffs(grid, c0, true)?;
    let u1 = SpectralField::from_coeffs(grid, c1, true)?;
    let nrm = norms::pair_sobolev(&u0, &u1, spec.s_target);
    if !(nrm > 0.0) {
        return invalid("fixture has zero norm");
    }
    let k = spec.amplitude / nrm;
    Ok((u0.scale(k), u1.scale(k)))
}
