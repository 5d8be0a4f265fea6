//! Energy `E(v) = ½(‖v‖² + ‖∇v‖² + ‖∂tv‖²) + (1/(p+1))∫|v|^{p+1}` and
//! exponential growth fits of `log(1 + E(t))`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::norms;
use crate::propagators::PhaseState;
use crate::solver::Sign;
use crate::verify::exponents;
use crate::verify::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `quadratic + potential` (defocusing), `quadratic − potential` (focusing).
    pub e: f64,
    pub quadratic: f64,
    /// `(1/(p+1)) mean |v|^{p+1}`; zero for linear dynamics.
    pub potential: f64,
    /// `(‖v‖²_{H¹} + ‖∂tv‖²_{L²})^{1/2}`.
    pub h1: f64,
}

/// Quadratic part by Parseval, potential by quadrature on the padded grid.
pub fn energy(state: &PhaseState, p: f64, sign: Sign) -> Result<EnergyRecord> {
    if !state.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    let h1sq = norms::sobolev_sq(&state.v, 1.0) + state.vt.l2_sq();
    let quadratic = 0.5 * h1sq;
    let potential = match sign {
        Sign::Linear => 0.0,
        _ => {
            let m = state.grid().padded();
            let s = state.v.real_samples_padded(m);
            let sum: f64 = s.iter().map(|x| x.abs().powf(p + 1.0)).sum();
            sum / s.len() as f64 / (p + 1.0)
        }
    };
    let e = match sign {
        Sign::Focusing => quadratic - potential,
        _ => quadratic + potential,
    };
    Ok(EnergyRecord { t: state.t, e, quadratic, potential, h1: h1sq.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Intercept of `log(1+E) ≈ C₁ + C₂ t`.
    pub c1: f64,
    /// Slope.
    pub c2: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub max_positive_deviation: f64,
    pub max_abs_deviation: f64,
    /// `max_positive_deviation < 0.5`.
    pub satisfies_exponential_bound: bool,
    pub records: usize,
}

pub const GROWTH_DEVIATION_LIMIT: f64 = 0.5;

pub fn growth_fit(records: &[EnergyRecord]) -> Result<GrowthFit> {
    if records.len() < 10 {
        return invalid(format!("growth fit needs at least 10 records, got {}", records.len()));
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = records.iter().map(|r| (1.0 + r.e.max(-0.999_999)).ln()).collect();
    let fit = stats::ols(&t, &y).ok_or_else(|| Error::InvalidArgument("degenerate time grid".into()))?;
    let dev: Vec<f64> = t.iter().zip(&y).map(|(t, y)| y - (fit.intercept + fit.slope * t)).collect();
    let max_pos = dev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_abs = dev.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok(GrowthFit {
        c1: fit.intercept,
        c2: fit.slope,
        residual: fit.rms_residual,
        max_positive_deviation: max_pos,
        max_abs_deviation: max_abs,
        satisfies_exponential_bound: max_pos < GROWTH_DEVIATION_LIMIT,
        records: records.len(),
    })
}

/// `min(1/2, 2/(p−1) − 1/2)`.
pub fn gwp_alpha_bound(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return invalid(format!("p must exceed 1, got {p}"));
    }
    Ok(exponents::alpha_bound(p))
}
