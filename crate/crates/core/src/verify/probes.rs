//! Ratio probes for the harmonic-analysis inequalities used by the solver:
//! Besov embedding, paraproduct, product, fractional chain rule and
//! Gagliardo–Nirenberg interpolation. Each probe reports the largest ratio of
//! the two sides over random fields on several grids.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::{make_grid, FourierGrid, C64};
use crate::norms::{besov, bessel, lebesgue, paraproduct_split, product, BesovSpec};
use crate::rng::{CounterRng, STREAM_TRIALS};
use crate::solver::nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// `‖u‖_{B^{.25}_{4,2}} / ‖u‖_{W^{.5,4}}`.
    BesovEmbedding,
    /// `‖u<v‖_{B^{.5}_{2,2}} / (‖u‖_{L⁴}‖v‖_{B^{.5}_{4,2}})`.
    Paraproduct,
    /// `‖uv‖_{B^{.5}_{2,2}} / (‖u‖_{B^{.5}_{4,2}}‖v‖_{L⁴} + ‖u‖_{L⁴}‖v‖_{B^{.5}_{4,2}})`.
    Product,
    /// `‖|u|²u‖_{W^{.5,2}} / (‖u‖_{W^{.5,4}}‖|u|²‖_{L⁴})`.
    ChainRule,
    /// `‖u‖_{W^{.75,8/3}} / (‖u‖_{W^{.5,2}}^{1/2}‖u‖_{W^{1,4}}^{1/2})`.
    GagliardoNirenberg,
}

impl Probe {
    pub const ALL: [Probe; 5] = [Probe::BesovEmbedding, Probe::Paraproduct, Probe::Product, Probe::ChainRule, Probe::GagliardoNirenberg];

    fn needs_pair(self) -> bool {
        matches!(self, Probe::Paraproduct | Probe::Product)
    }

    pub fn ratio(self, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        let b = |s, p| BesovSpec::new(s, p, 2.0);
        Ok(match self {
            Probe::BesovEmbedding => besov(u, b(0.25, 4.0)?) / bessel(u, 0.5, 4.0),
            Probe::Paraproduct => {
                let (lo, _, _) = paraproduct_split(u, v)?;
                besov(&lo, b(0.5, 2.0)?) / (lebesgue(u, 4.0) * besov(v, b(0.5, 4.0)?))
            }
            Probe::Product => {
                let uv = product(u, v)?;
                let bs = b(0.5, 4.0)?;
                besov(&uv, b(0.5, 2.0)?) / (besov(u, bs) * lebesgue(v, 4.0) + lebesgue(u, 4.0) * besov(v, bs))
            }
            Probe::ChainRule => {
                // Pad 2 makes the cubic exact on the lattice.
                let cube = nonlinearity(u, 3.0, 2.0)?;
                bessel(&cube, 0.5, 2.0) / (bessel(u, 0.5, 4.0) * lebesgue(u, 8.0).powi(2))
            }
            Probe::GagliardoNirenberg => bessel(u, 0.75, 8.0 / 3.0) / (bessel(u, 0.5, 2.0) * bessel(u, 1.0, 4.0)).sqrt(),
        })
    }
}

/// Random real field with `û(n) = a·g_n·⟨n⟩^{−κ}`, `κ ∈ [1.5, 3.5]`. Coefficients are
/// keyed by the mode, so the same trial on a larger grid only adds a tail.
pub fn probe_field(grid: &Arc<FourierGrid>, seed: u64, trial: u64) -> SpectralField {
    let mut head = CounterRng::new(seed, trial, STREAM_TRIALS, 0);
    let kappa = 1.5 + 2.0 * head.uniform();
    let amp = (4.0 * head.uniform() - 2.0).exp();
    let mut c = vec![C64::new(0.0, 0.0); grid.len()];
    for i in grid.representatives() {
        let k = grid.mode(i);
        let key = (((k[0] + (1 << 20)) as u64) << 21) | (k[1] + (1 << 20)) as u64;
        let mut r = CounterRng::new(seed, trial, STREAM_TRIALS, 4 * (key + 1));
        let (a, b) = r.normal_pair();
        let w = amp * grid.bracket(i).powf(-kappa);
        c[i] = C64::new(a * w, b * w);
        c[grid.neg_index(i)] = c[i].conj();
    }
    SpectralField::from_coeffs(grid, c, true).expect("lattice shape")
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub probe: Probe,
    pub grids: Vec<usize>,
    pub fields: usize,
    pub seed: u64,
    pub max_ratios: Vec<f64>,
    /// `(max − min)/max` of the per-grid maxima.
    pub variation: f64,
    pub pass: bool,
}

/// Relative spread of the per-grid maxima tolerated as a grid-independent constant.
pub const PROBE_TOLERANCE: f64 = 0.2;

pub fn run_probe(probe: Probe, grids: &[usize], fields: usize, seed: u64) -> Result<ProbeReport> {
    if grids.is_empty() || fields == 0 {
        return invalid("need at least one grid and one field");
    }
    let mut max_ratios = Vec::with_capacity(grids.len());
    for &n in grids {
        let g = make_grid(n, 1.5)?;
        let ratios: Vec<f64> = (0..fields as u64)
            .into_par_iter()
            .map(|k| {
                let u = probe_field(&g, seed, 2 * k);
                let v = if probe.needs_pair() { probe_field(&g, seed, 2 * k + 1) } else { u.clone() };
                probe.ratio(&u, &v)
            })
            .collect::<Result<_>>()?;
        max_ratios.push(ratios.into_iter().fold(0.0, f64::max));
    }
    let hi = max_ratios.iter().cloned().fold(0.0, f64::max);
    let lo = max_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = (hi - lo) / hi;
    Ok(ProbeReport {
        probe,
        grids: grids.to_vec(),
        fields,
        seed,
        max_ratios,
        variation,
        pass: variation.is_finite() && variation < PROBE_TOLERANCE,
    })
}
