//! Exceedance probabilities of space-time norms of randomized linear evolutions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::propagators::{linear_slice_norm, linear_space_time_norm, SpaceTimeNorm};
use crate::quadrature::TimeQuadrature;
use crate::randomize::{randomize_draw, Distribution};

use super::stats::{median, ols, wilson};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailStatistic {
    /// `‖D^β z‖_{L^q([0,T]; L^r)}`.
    SpaceTime { q: f64, r: f64, beta: f64 },
    /// `‖z‖_{L^∞([T₀,T]; L^r)}` as a maximum over `steps+1` equispaced times.
    Sup { t0: f64, r: f64, steps: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub lambdas: Vec<f64>,
    pub exceed: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// 95% Wilson intervals.
    pub intervals: Vec<(f64, f64)>,
    /// Points with fewer exceedances than this are excluded from the fit.
    pub min_count: usize,
    /// Slope of `log P` against `λ²`, with its standard error.
    pub slope: Option<(f64, f64)>,
    pub samples: usize,
    /// No admissible point, or too few to fit.
    pub inconclusive: bool,
    /// `log P` decreasing and not convex beyond its interval widths.
    pub gaussian_consistent: bool,
}

/// Samples the statistic of `z = V(t)(u₀^ω, u₁^ω)` over independent draws.
pub fn sample_statistic(
    u0: &SpectralField,
    u1: &SpectralField,
    dist: Distribution,
    seed: u64,
    draws: usize,
    stat: TailStatistic,
    t_end: f64,
    panels: usize,
) -> Result<Vec<f64>> {
    match stat {
        TailStatistic::SpaceTime { q, beta, .. } if beta > 0.0 && q * beta >= 1.0 => {
            return invalid(format!("need qβ < 1, got q={q}, β={beta}"));
        }
        TailStatistic::Sup { t0, steps, .. } if !(t0 >= 0.0 && t0 < t_end) || steps == 0 => {
            return invalid("sup statistic needs 0 <= T0 < T and at least one step");
        }
        _ => {}
    }
    (0..draws as u64)
        .into_par_iter()
        .map(|k| {
            let d = randomize_draw(u0, u1, dist, seed, k)?;
            match stat {
                TailStatistic::SpaceTime { q, r, beta } => {
                    let quad = TimeQuadrature { initial_panels: panels, rel_tol: 1e-3, max_panels: 64 * panels };
                    linear_space_time_norm(&d.u0, &d.u1, SpaceTimeNorm { q, r, beta }, t_end, Some(quad))
                }
                TailStatistic::Sup { t0, r, steps } => {
                    let nrm = SpaceTimeNorm { q: f64::INFINITY, r, beta: 0.0 };
                    Ok((0..=steps)
                        .map(|i| linear_slice_norm(&d.u0, &d.u1, nrm, t0 + (t_end - t0) * i as f64 / steps as f64))
                        .fold(0.0, f64::max))
                }
            }
        })
        .collect()
}

pub fn tail_estimate(values: &[f64], lambdas: &[f64], min_count: usize) -> TailEstimate {
    let n = values.len();
    let exceed: Vec<usize> = lambdas.iter().map(|&l| values.iter().filter(|&&v| v > l).count()).collect();
    let probabilities: Vec<f64> = exceed.iter().map(|&k| k as f64 / n.max(1) as f64).collect();
    let intervals: Vec<(f64, f64)> = exceed.iter().map(|&k| wilson(k, n, 1.96)).collect();
    let keep: Vec<usize> = (0..lambdas.len()).filter(|&i| exceed[i] >= min_count && exceed[i] < n).collect();
    let x: Vec<f64> = keep.iter().map(|&i| lambdas[i] * lambdas[i]).collect();
    let y: Vec<f64> = keep.iter().map(|&i| probabilities[i].ln()).collect();
    let fit = if keep.len() >= 3 { ols(&x, &y) } else { None };
    let slope = fit.map(|f| (f.slope, f.slope_stderr));
    let decreasing = probabilities.windows(2).all(|w| w[1] <= w[0]);
    // Convexity of log P in λ would contradict a Gaussian tail; allow it within the intervals.
    let mut concave_ok = true;
    for w in keep.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let (la, lb, lc) = (lambdas[a], lambdas[b], lambdas[c]);
        let interp = probabilities[a].ln() + (probabilities[c].ln() - probabilities[a].ln()) * (lb - la) / (lc - la);
        if probabilities[b].ln() < interp {
            let slack = intervals[b].1.ln() - probabilities[b].ln();
            if probabilities[b].ln() + slack < interp {
                concave_ok = false;
            }
        }
    }
    let inconclusive = slope.is_none();
    TailEstimate {
        lambdas: lambdas.to_vec(),
        probabilities,
        intervals,
        exceed,
        min_count,
        gaussian_consistent: decreasing && concave_ok && slope.map_or(true, |s| s.0 < 0.0),
        slope,
        samples: n,
        inconclusive,
    }
}

/// Equispaced `λ` from the sample median to the largest sample.
pub fn default_lambdas(values: &[f64], points: usize) -> Vec<f64> {
    let lo = median(values);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..points).map(|i| lo + (hi - lo) * i as f64 / points as f64).collect()
}
