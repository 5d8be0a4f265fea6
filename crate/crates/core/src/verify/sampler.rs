//! Consistency of the exact noise sampler: one long step against `k` short
//! steps, both against the quadrature covariance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::noise::{covariance_oracle, psd_cholesky, sample_mode};
use crate::rng::{CounterRng, STREAM_TRIALS};

use super::stats::{ks_one_sample, ks_two_sample, normal_cdf, KsResult};

#[derive(Debug, Clone, Serialize)]
pub struct ModeCheck {
    pub n: [i64; 2],
    pub t: f64,
    pub steps: usize,
    pub oracle: [[f64; 2]; 2],
    /// Mean of the whitened squared norm for one step and for `steps` steps;
    /// the exact value is 4.
    pub trace_one: f64,
    pub trace_many: f64,
    /// Standard error of those means.
    pub stderr: f64,
    pub within_one: bool,
    pub within_many: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplerReport {
    pub alpha: f64,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<ModeCheck>,
    pub ks_one: KsResult,
    pub ks_many: KsResult,
    pub ks_between: KsResult,
    pub pass: bool,
}

/// Whitened real components `L⁻¹(Re Ψ̂, Re ∂tΨ̂)·√2` and the same for the imaginary parts.
fn whiten(l: [[f64; 2]; 2], x: (f64, f64)) -> (f64, f64) {
    let a = x.0 / l[0][0];
    let b = (x.1 - l[1][0] * a) / l[1][1];
    (a * std::f64::consts::SQRT_2, b * std::f64::consts::SQRT_2)
}

/// Draws `checks` random `(n, t)` with `1 ≤ |n|∞ ≤ n_max`, `t ∈ [0.1, 2]` and `k ∈ [2, 16]`.
pub fn sampler_consistency(alpha: f64, checks: usize, samples: usize, n_max: i64, seed: u64) -> Result<SamplerReport> {
    if samples < 100 || checks == 0 {
        return invalid("need at least one check and 100 samples");
    }
    let mut r = CounterRng::new(seed, 0, STREAM_TRIALS, 0);
    let mut cases = Vec::new();
    for _ in 0..checks {
        let n1 = (r.uniform() * (2 * n_max + 1) as f64).floor() as i64 - n_max;
        let n2 = (r.uniform() * (n_max + 1) as f64).floor() as i64;
        let n = if n1 == 0 && n2 == 0 { [1, 0] } else { [n1, n2] };
        let t = 0.1 + 1.9 * r.uniform();
        let k = 2 + (r.uniform() * 15.0).floor() as usize;
        cases.push((n, t, k));
    }
    let results: Vec<(ModeCheck, Vec<f64>, Vec<f64>)> = cases
        .par_iter()
        .enumerate()
        .map(|(ci, &(n, t, k))| -> Result<_> {
            let d = ((n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
            let oracle = covariance_oracle(n, t, t, alpha)?;
            let l = psd_cholesky(oracle);
            let one = [t];
            let many = vec![t / k as f64; k];
            let mut w1 = Vec::with_capacity(4 * samples);
            let mut wk = Vec::with_capacity(4 * samples);
            let mut s1 = 0.0;
            let mut sk = 0.0;
            for path in 0..samples as u64 {
                // Separate path ranges per case and per scheme keep all draws independent.
                let base = (ci as u64) << 40;
                let (x, y) = sample_mode(d, alpha, seed, base | path, 0, &one)?;
                let (u, v) = sample_mode(d, alpha, seed, base | (1 << 32) | path, 0, &many)?;
                for (out, acc, (p, q)) in [(&mut w1, &mut s1, (x, y)), (&mut wk, &mut sk, (u, v))] {
                    let (a, b) = whiten(l, (p.re, q.re));
                    let (c, e) = whiten(l, (p.im, q.im));
                    *acc += a * a + b * b + c * c + e * e;
                    out.extend_from_slice(&[a, b, c, e]);
                }
            }
            let ns = samples as f64;
            // Each whitened squared norm is χ²₄ with variance 8.
            let stderr = (8.0 / ns).sqrt();
            let (m1, mk) = (s1 / ns, sk / ns);
            Ok((
                ModeCheck {
                    n,
                    t,
                    steps: k,
                    oracle,
                    trace_one: m1,
                    trace_many: mk,
                    stderr,
                    within_one: (m1 - 4.0).abs() <= 3.0 * stderr,
                    within_many: (mk - 4.0).abs() <= 3.0 * stderr,
                },
                w1,
                wk,
            ))
        })
        .collect::<Result<_>>()?;
    let mut pooled_one = Vec::new();
    let mut pooled_many = Vec::new();
    let mut checks_out = Vec::new();
    for (c, a, b) in results {
        checks_out.push(c);
        pooled_one.extend(a);
        pooled_many.extend(b);
    }
    let ks_one = ks_one_sample(&pooled_one, normal_cdf);
    let ks_many = ks_one_sample(&pooled_many, normal_cdf);
    let ks_between = ks_two_sample(&pooled_one, &pooled_many);
    let pass = checks_out.iter().all(|c| c.within_one && c.within_many)
        && ks_one.p_value > 0.01
        && ks_many.p_value > 0.01
        && ks_between.p_value > 0.01;
    Ok(SamplerReport { alpha, samples, seed, checks: checks_out, ks_one, ks_many, ks_between, pass })
}
