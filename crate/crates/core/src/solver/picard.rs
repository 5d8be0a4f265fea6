//! Picard iteration of the Duhamel map on one window.
//!
//! The window `[t₀, t₀+T]` carries `m+1` equispaced nodes. Given nonlinear
//! values `N_k` at the nodes, the map is evaluated by product integration:
//! on each sub-interval `N` is replaced by its cubic Lagrange interpolant
//! through four neighbouring nodes and integrated exactly against the mode
//! kernel, so `X_{k+1} = M(τ)X_k + Σ_i W_i N_{k+o_i}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::FourierGrid;
use crate::norms;
use crate::propagators::{duhamel_moments, flow_table, ModeSymbol, PhaseState};
use crate::verify::stats::{ols, LinearFit};

use super::{nonlinear_term, Forcing, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    pub t0: f64,
    pub length: f64,
    pub nodes: usize,
    pub iterations: usize,
    /// Distance between successive iterates, one entry per iteration.
    pub distances: Vec<f64>,
    /// Largest ratio of successive distances above round-off.
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// States at the `m+1` nodes, starting with the initial state.
    pub states: Vec<PhaseState>,
    pub diagnostics: WindowDiagnostics,
}

const STENCILS: [&[i64]; 6] = [&[0, 1], &[0, 1, 2], &[-1, 0, 1], &[0, 1, 2, 3], &[-1, 0, 1, 2], &[-2, -1, 0, 1]];

fn stencil_for(k: usize, m: usize) -> usize {
    match m {
        1 => 0,
        2 => {
            if k == 0 {
                1
            } else {
                2
            }
        }
        _ => {
            if k == 0 {
                3
            } else if k + 2 <= m {
                4
            } else {
                5
            }
        }
    }
}

/// Monomial coefficients of the Lagrange basis on `nodes`.
fn lagrange_monomials(nodes: &[i64]) -> Vec<[f64; 4]> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &oi)| {
            let mut c = [0.0; 4];
            c[0] = 1.0;
            let mut deg = 0;
            for (j, &oj) in nodes.iter().enumerate() {
                if i == j {
                    continue;
                }
                let den = (oi - oj) as f64;
                let mut next = [0.0; 4];
                for d in 0..=deg {
                    next[d + 1] += c[d] / den;
                    next[d] -= c[d] * oj as f64 / den;
                }
                c = next;
                deg += 1;
            }
            c
        })
        .collect()
}

/// Product-integration weights for node spacing `τ`.
pub(crate) struct ProductWeights {
    flow: std::sync::Arc<Vec<[f64; 4]>>,
    /// Per stencil, per mode, per stencil point: `(v row, ∂tv row)`.
    stencils: Vec<Vec<[[f64; 2]; 4]>>,
}

impl ProductWeights {
    pub(crate) fn new(grid: &FourierGrid, tau: f64, cfg: &SolverConfig) -> Self {
        let flow = flow_table(grid, tau, cfg.damping);
        let moments: Vec<[[f64; 2]; 4]> = grid
            .multipliers()
            .d
            .iter()
            .map(|&d| duhamel_moments(ModeSymbol::new(d, cfg.damping), tau))
            .collect();
        let stencils = STENCILS
            .iter()
            .map(|nodes| {
                let basis = lagrange_monomials(nodes);
                moments
                    .iter()
                    .map(|mom| {
                        let mut w = [[0.0; 2]; 4];
                        for (i, c) in basis.iter().enumerate() {
                            for row in 0..2 {
                                w[i][row] = (0..4).map(|j| c[j] * mom[j][row]).sum();
                            }
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        ProductWeights { flow, stencils }
    }
}

/// Evaluates the discrete Duhamel map for given node values of `N`.
fn sweep(x0: &PhaseState, terms: Option<&[SpectralField]>, w: &ProductWeights, tau: f64, m: usize) -> Vec<PhaseState> {
    let g = x0.grid().clone();
    let len = g.len();
    let herm = x0.v.is_hermitian() && x0.vt.is_hermitian() && terms.map_or(true, |t| t.iter().all(|f| f.is_hermitian()));
    let mut v = x0.v.coeffs().to_vec();
    let mut vt = x0.vt.coeffs().to_vec();
    let mut out = Vec::with_capacity(m + 1);
    out.push(x0.clone());
    for k in 0..m {
        let st = stencil_for(k, m);
        let offs = STENCILS[st];
        let ws = &w.stencils[st];
        for i in 0..len {
            let f = w.flow[i];
            let (a, b) = (v[i], vt[i]);
            let mut na = a * f[0] + b * f[1];
            let mut nb = a * f[2] + b * f[3];
            if let Some(terms) = terms {
                for (p, &o) in offs.iter().enumerate() {
                    let nk = terms[(k as i64 + o) as usize].coeffs()[i];
                    if nk.re == 0.0 && nk.im == 0.0 {
                        continue;
                    }
                    na += nk * ws[i][p][0];
                    nb += nk * ws[i][p][1];
                }
            }
            v[i] = na;
            vt[i] = nb;
        }
        let mut fv = SpectralField::from_coeffs(&g, v.clone(), false).expect("lattice shape");
        let mut fvt = SpectralField::from_coeffs(&g, vt.clone(), false).expect("lattice shape");
        fv.set_hermitian_flag(herm);
        fvt.set_hermitian_flag(herm);
        out.push(PhaseState { t: x0.t + (k + 1) as f64 * tau, v: fv, vt: fvt });
    }
    out
}

/// `sup_k ‖Δ(v,∂tv)(t_k)‖_{H^σ×H^{σ−1}} + ‖Δv‖_{L^q_T L^r}` with the trapezoid rule in time.
pub(crate) fn distance(a: &[PhaseState], b: &[PhaseState], cfg: &SolverConfig, tau: f64) -> f64 {
    let parts: Vec<(f64, f64)> = a
        .par_iter()
        .zip(b.par_iter())
        .map(|(x, y)| {
            let dv = x.v.sub(&y.v);
            let dvt = x.vt.sub(&y.vt);
            (norms::pair_sobolev(&dv, &dvt, cfg.sigma), norms::lebesgue(&dv, cfg.r))
        })
        .collect();
    let sup = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    let lq = if cfg.q.is_infinite() {
        parts.iter().map(|p| p.1).fold(0.0, f64::max)
    } else {
        let n = parts.len();
        let s: f64 = parts
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let w = if n > 1 && (k == 0 || k == n - 1) { 0.5 } else { 1.0 };
                w * tau * p.1.powf(cfg.q)
            })
            .sum();
        s.powf(1.0 / cfg.q)
    };
    sup + lq
}

fn node_count(length: f64, forcing: &Forcing, cfg: &SolverConfig) -> Result<usize> {
    if forcing.is_stochastic() {
        let m = (length / cfg.h).round();
        if m < 1.0 || (m * cfg.h - length).abs() > 1e-9 * length {
            return invalid(format!("window {length} is not a multiple of the noise step {}", cfg.h));
        }
        Ok(m as usize)
    } else {
        Ok(((length / cfg.h) - 1e-9).ceil().max(1.0) as usize)
    }
}

/// Picard iteration from the linear evolution of `initial` over `[t₀, t₀+length]`.
///
/// A window that fails to contract is reported through `diagnostics.converged`,
/// not as an error; errors are reserved for invalid input.
pub fn picard_window(initial: &PhaseState, length: f64, forcing: &mut Forcing, cfg: &SolverConfig) -> Result<PicardOutcome> {
    cfg.validate()?;
    if !(length > 0.0) || !length.is_finite() {
        return invalid(format!("window length must be positive, got {length}"));
    }
    let m = node_count(length, forcing, cfg)?;
    let tau = length / m as f64;
    let g = initial.grid().clone();
    let w = ProductWeights::new(&g, tau, cfg);
    let t0 = initial.t;
    let samples: Vec<Option<SpectralField>> = (0..=m).map(|k| forcing.sample(t0 + k as f64 * tau)).collect::<Result<_>>()?;

    let mut x = sweep(initial, None, &w, tau, m);
    let mut distances: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut scale = 1.0;
    let linear = cfg.sign.coefficient() == 0.0;
    for _ in 0..cfg.picard_max {
        let terms: Result<Vec<SpectralField>> = if linear {
            Ok(vec![SpectralField::zeros(&g); m + 1])
        } else {
            x.par_iter().zip(samples.par_iter()).map(|(s, f)| nonlinear_term(&s.v, f.as_ref(), cfg)).collect()
        };
        let terms = match terms {
            Ok(t) => t,
            Err(_) => {
                distances.push(f64::INFINITY);
                break;
            }
        };
        let next = sweep(initial, Some(&terms), &w, tau, m);
        let d = distance(&next, &x, cfg, tau);
        scale = next.iter().map(|s| s.norm(cfg.sigma)).fold(1.0, f64::max);
        distances.push(d);
        x = next;
        if !d.is_finite() || !scale.is_finite() {
            break;
        }
        if d <= cfg.picard_tol * scale {
            converged = true;
            break;
        }
        let n = distances.len();
        if n >= 3 && distances[n - 1] > distances[n - 2] && distances[n - 2] > distances[n - 3] {
            break;
        }
    }
    let floor = 1e3 * f64::EPSILON * scale;
    let ratio = distances
        .windows(2)
        .filter(|p| p[0] > floor)
        .map(|p| p[1] / p[0])
        .fold(0.0, f64::max);
    let ratio = if distances.iter().any(|d| !d.is_finite()) { f64::INFINITY } else { ratio };
    let converged = converged && ratio < 1.0;
    Ok(PicardOutcome {
        diagnostics: WindowDiagnostics {
            t0,
            length,
            nodes: m + 1,
            iterations: distances.len(),
            distances,
            ratio,
            converged,
        },
        states: x,
    })
}

/// Slope of `log ratio` against `log T` over converged windows with a
/// nonzero ratio: the empirical smallness gain of the contraction.
pub fn fit_contraction_exponent(windows: &[WindowDiagnostics]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.converged && w.ratio > 0.0)
        .map(|w| (w.length.ln(), w.ratio.ln()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    ols(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_basis_reproduces_cubics() {
        let nodes = [-1i64, 0, 1, 2];
        let basis = lagrange_monomials(&nodes);
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        for &theta in &[0.0, 0.3, 0.77, 1.0] {
            let v: f64 = basis
                .iter()
                .zip(&nodes)
                .map(|(c, &o)| f(o as f64) * (c[0] + c[1] * theta + c[2] * theta * theta + c[3] * theta.powi(3)))
                .sum();
            assert!((v - f(theta)).abs() < 1e-13);
        }
    }

    #[test]
    fn stencils_stay_inside_window() {
        for m in 1..8usize {
            for k in 0..m {
                for &o in STENCILS[stencil_for(k, m)] {
                    let j = k as i64 + o;
                    assert!(j >= 0 && j <= m as i64, "m={m} k={k} o={o}");
                }
            }
        }
    }
}
