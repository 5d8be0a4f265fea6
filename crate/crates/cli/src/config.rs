//! Run configuration for `vnlw simulate`.

use serde::{Deserialize, Serialize};

use vnlw_core::propagators::Damping;
use vnlw_core::randomize::{DecayProfile, Distribution};
use vnlw_core::solver::{Integrator, Sign};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub dynamics: Dynamics,
    #[serde(default)]
    pub initial: Initial,
    pub time: TimeConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seeds: Seeds,
    pub output: Output,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N")]
    pub n: usize,
    /// Defaults to the alias-free pad for `p`.
    #[serde(default)]
    pub pad: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingKind {
    None,
    Stochastic,
    Randomized,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dynamics {
    pub p: f64,
    pub sign: Sign,
    pub forcing: ForcingKind,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub damping: Damping,
    #[serde(default)]
    pub integrator: Integrator,
    /// Multiplier law for randomized forcing.
    #[serde(default = "gaussian")]
    pub distribution: Distribution,
}

fn gaussian() -> Distribution {
    Distribution::Gaussian
}

/// Deterministic data `(u₀, u₁)` with prescribed pair `H^s` norm. For
/// randomized forcing the same pair is randomized and evolved linearly instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub s: f64,
    pub profile: DecayProfile,
    pub amplitude: f64,
    #[serde(default)]
    pub position_only: bool,
}

impl Default for Initial {
    fn default() -> Self {
        Initial { s: 0.0, profile: DecayProfile::Power { exponent: 2.0 }, amplitude: 0.0, position_only: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T_final")]
    pub t_final: f64,
    pub h: f64,
    #[serde(rename = "T_loc")]
    pub t_loc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub picard_tol: f64,
    pub picard_max: usize,
    pub overflow: f64,
    pub window_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { picard_tol: 1e-10, picard_max: 60, overflow: 1e8, window_floor: 2f64.powi(-16) }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub noise: u64,
    pub data: u64,
    pub path: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub cadence: f64,
    pub directory: String,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

/// Parses a config, reporting the line and column of the first problem.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| format!("line {}, column {}: {e}", e.line(), e.column()))?;
    if cfg.grid.n < 4 || cfg.grid.n % 2 != 0 {
        return Err(format!("grid.N must be even and at least 4, got {}", cfg.grid.n));
    }
    if cfg.dynamics.forcing == ForcingKind::Stochastic && !(cfg.dynamics.alpha < 0.5) {
        return Err(format!("dynamics.alpha must be below 1/2 for stochastic forcing, got {}", cfg.dynamics.alpha));
    }
    if !(cfg.time.t_final > 0.0) {
        return Err(format!("time.T_final must be positive, got {}", cfg.time.t_final));
    }
    if cfg.output.directory.is_empty() {
        return Err("output.directory must not be empty".into());
    }
    Ok(cfg)
}
