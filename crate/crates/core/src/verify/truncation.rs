//! Convergence of the frequency truncations `Ψ_N → Ψ` in `W^{s,∞}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::make_grid;
use crate::noise::{covariance_oracle, NoiseState};
use crate::norms;

#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub alpha: f64,
    pub s: f64,
    pub t: f64,
    pub grid: usize,
    pub cuts: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    /// `‖Ψ − Ψ_N‖_{W^{s,∞}}` per path, per cut.
    pub errors: Vec<Vec<f64>>,
    pub mean_errors: Vec<f64>,
    /// `Σ_{|n|>N} ⟨n⟩^{2s} E|Ψ̂(t,n)|²` per cut.
    pub oracle_tails: Vec<f64>,
    /// `mean(N_{k+1}) / mean(N_k)` against `(tail(N_{k+1}) / tail(N_k))^{1/2}`.
    pub decay_ratios: Vec<(f64, f64)>,
    pub monotone_paths: usize,
    pub pass: bool,
}

/// Samples `paths` independent `Ψ(t)` on an `n_grid` lattice and measures the
/// truncation errors at each cut. Passes when every path decreases strictly and
/// each mean decay ratio is within `rel_tol` of the oracle ratio.
pub fn truncation_convergence(
    alpha: f64,
    t: f64,
    cuts: &[f64],
    n_grid: usize,
    paths: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<TruncationReport> {
    if cuts.len() < 2 || cuts.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("cuts must be increasing and at least two");
    }
    if *cuts.last().unwrap() >= (n_grid / 2) as f64 {
        return invalid(format!("cuts must stay below N/2 = {}", n_grid / 2));
    }
    let s = 0.5 - alpha - 0.1;
    let grid = make_grid(n_grid, 1.0)?;
    let errors: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|path| -> Result<Vec<f64>> {
            let mut st = NoiseState::new(&grid, alpha, seed, path as u64)?;
            st.advance(t)?;
            let psi = st.psi();
            Ok(cuts
                .iter()
                .map(|&c| norms::bessel(&psi.sub(&psi.truncate(c)), s, f64::INFINITY))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mean_errors: Vec<f64> = (0..cuts.len())
        .map(|k| errors.iter().map(|e| e[k]).sum::<f64>() / paths as f64)
        .collect();
    let mut tails = vec![0.0; cuts.len()];
    let mut cache = std::collections::BTreeMap::new();
    for i in grid.representatives() {
        let a2 = grid.abs2(i);
        let v = match cache.get(&a2) {
            Some(&v) => v,
            None => {
                let v = covariance_oracle(grid.mode(i), t, t, alpha)?[0][0];
                cache.insert(a2, v);
                v
            }
        };
        let w = 2.0 * grid.bracket(i).powf(2.0 * s) * v;
        for (tail, &c) in tails.iter_mut().zip(cuts) {
            if (a2 as f64) > c * c {
                *tail += w;
            }
        }
    }
    let decay_ratios: Vec<(f64, f64)> = (1..cuts.len())
        .map(|k| (mean_errors[k] / mean_errors[k - 1], (tails[k] / tails[k - 1]).sqrt()))
        .collect();
    let monotone_paths = errors.iter().filter(|e| e.windows(2).all(|w| w[1] < w[0])).count();
    let pass = monotone_paths == paths && decay_ratios.iter().all(|(m, o)| (m / o - 1.0).abs() <= rel_tol);
    Ok(TruncationReport {
        alpha,
        s,
        t,
        grid: n_grid,
        cuts: cuts.to_vec(),
        paths,
        seed,
        errors,
        mean_errors,
        oracle_tails: tails,
        decay_ratios,
        monotone_paths,
        pass,
    })
}
