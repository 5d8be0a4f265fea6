//! Log-log regression of `E|Ψ̂(t,n)|²` against `⟨n⟩` over a frequency band.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::make_grid;
use crate::noise::{covariance_oracle, NoiseState};

use super::stats::ols;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum VarianceMode {
    MonteCarlo { samples: usize, seed: u64 },
    /// Quadrature values of the covariance, no sampling.
    Oracle,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceFit {
    pub alpha: f64,
    pub t: f64,
    pub band: (f64, f64),
    pub grid: usize,
    pub mode: VarianceMode,
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// `(⟨n⟩, variance)` per representative mode in the band.
    pub points: Vec<(f64, f64)>,
}

/// Paths per parallel chunk; fixed so the reduction order does not depend on
/// the number of workers.
const CHUNK: usize = 50;

pub fn fit_variance_exponent(alpha: f64, t: f64, band: (f64, f64), n_grid: usize, mode: VarianceMode) -> Result<VarianceFit> {
    if !(band.0 > 0.0) || !(band.1 >= 2.0 * band.0) {
        return invalid(format!("band {band:?} must span at least one octave"));
    }
    if band.1 > (n_grid / 2) as f64 {
        return invalid(format!("band {band:?} exceeds the grid with N = {n_grid}"));
    }
    if !(t > 0.0) {
        return invalid(format!("time must be positive, got {t}"));
    }
    let grid = make_grid(n_grid, 1.0)?;
    let modes: Vec<usize> = grid
        .representatives()
        .into_iter()
        .filter(|&i| {
            let d = grid.abs_n(i);
            d >= band.0 && d <= band.1
        })
        .collect();
    let variances: Vec<f64> = match mode {
        VarianceMode::MonteCarlo { samples, seed } => {
            if samples < 500 {
                return invalid(format!("need at least 500 samples, got {samples}"));
            }
            let chunks: Vec<(usize, usize)> = (0..samples).step_by(CHUNK).map(|a| (a, (a + CHUNK).min(samples))).collect();
            let partial: Vec<Vec<f64>> = chunks
                .par_iter()
                .map(|&(a, b)| -> Result<Vec<f64>> {
                    let mut acc = vec![0.0; modes.len()];
                    for path in a..b {
                        let mut st = NoiseState::new(&grid, alpha, seed, path as u64)?;
                        st.advance(t)?;
                        let c = st.psi().coeffs();
                        for (s, &i) in acc.iter_mut().zip(&modes) {
                            *s += c[i].norm_sqr();
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            let mut tot = vec![0.0; modes.len()];
            for p in &partial {
                for (s, x) in tot.iter_mut().zip(p) {
                    *s += x;
                }
            }
            tot.into_iter().map(|s| s / samples as f64).collect()
        }
        VarianceMode::Oracle => {
            let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
            let mut out = Vec::with_capacity(modes.len());
            for &i in &modes {
                let a2 = grid.abs2(i);
                let v = match cache.get(&a2) {
                    Some(v) => *v,
                    None => {
                        let v = covariance_oracle(grid.mode(i), t, t, alpha)?[0][0];
                        cache.insert(a2, v);
                        v
                    }
                };
                out.push(v);
            }
            out
        }
    };
    let points: Vec<(f64, f64)> = modes.iter().zip(&variances).map(|(&i, &v)| (grid.bracket(i), v)).collect();
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = ols(&x, &y).ok_or_else(|| Error::InvalidArgument("band contains too few modes".into()))?;
    Ok(VarianceFit {
        alpha,
        t,
        band,
        grid: n_grid,
        mode,
        slope: fit.slope,
        stderr: fit.slope_stderr,
        intercept: fit.intercept,
        rms_residual: fit.rms_residual,
        points,
    })
}
