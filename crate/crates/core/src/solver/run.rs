//! Chaining windows (or steps) up to a final time, with window halving on
//! contraction failure and an overflow guard for focusing runs.

use serde::{Deserialize, Serialize};

use crate::energy::{energy, EnergyRecord};
use crate::error::{invalid, Error, Result};
use crate::propagators::PhaseState;

use super::etd::EtdStepper;
use super::picard::{picard_window, WindowDiagnostics};
use super::{Forcing, Integrator, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    ContractionFailed,
    NormOverflow,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Recorded states, strictly increasing in time.
    pub states: Vec<PhaseState>,
    /// One entry per attempted Picard window, accepted or not.
    pub windows: Vec<WindowDiagnostics>,
    pub status: RunStatus,
    /// Time reached.
    pub t_end: f64,
    /// Time and norm at which the overflow guard fired.
    pub overflow: Option<(f64, f64)>,
}

struct Recorder<'a> {
    cfg: &'a SolverConfig,
    next: f64,
    states: Vec<PhaseState>,
    energies: Vec<EnergyRecord>,
}

impl Recorder<'_> {
    fn push(&mut self, s: &PhaseState) -> Result<()> {
        if let Some(last) = self.states.last() {
            if s.t <= last.t {
                return Ok(());
            }
        }
        self.energies.push(energy(s, self.cfg.p, self.cfg.sign)?);
        self.states.push(s.clone());
        while self.next <= s.t + 1e-9 * self.cfg.cadence {
            self.next += self.cfg.cadence;
        }
        Ok(())
    }

    fn offer(&mut self, s: &PhaseState) -> Result<()> {
        if s.t >= self.next - 1e-9 * self.cfg.cadence {
            self.push(s)?;
        }
        Ok(())
    }
}

fn overflowed(s: &PhaseState, cfg: &SolverConfig) -> Option<f64> {
    let n = s.norm(cfg.sigma);
    if !n.is_finite() || n > cfg.overflow {
        Some(n)
    } else {
        None
    }
}

/// Advances `initial` to `t_final`, recording states and energies every `cadence`.
pub fn global_run(
    initial: &PhaseState,
    t_final: f64,
    forcing: &mut Forcing,
    cfg: &SolverConfig,
) -> Result<(Trajectory, Vec<EnergyRecord>)> {
    cfg.validate()?;
    if !(t_final > initial.t) || !t_final.is_finite() {
        return invalid(format!("final time {t_final} must exceed the initial time {}", initial.t));
    }
    let mut rec = Recorder { cfg, next: initial.t, states: Vec::new(), energies: Vec::new() };
    rec.push(initial)?;
    let mut windows = Vec::new();
    let mut state = initial.clone();
    let mut status = RunStatus::Completed;
    let mut overflow = None;
    let eps = 1e-12 * t_final.max(1.0);
    let stochastic = forcing.is_stochastic();
    if stochastic {
        let k = ((t_final - initial.t) / cfg.h).round();
        if ((t_final - initial.t) - k * cfg.h).abs() > 1e-9 * t_final {
            return invalid(format!("final time {t_final} is not on the noise step grid (h = {})", cfg.h));
        }
    }
    let snap = |w: f64| if stochastic { (w / cfg.h).floor().max(1.0) * cfg.h } else { w };

    match cfg.integrator {
        Integrator::Picard => {
            let t_loc = snap(cfg.t_loc);
            let min_w = forcing.min_window(cfg.window_floor);
            let mut w = t_loc;
            'outer: while state.t < t_final - eps {
                let mut len = w.min(t_final - state.t);
                if stochastic {
                    len = ((len / cfg.h).round().max(1.0)) * cfg.h;
                }
                let out = picard_window(&state, len, forcing, cfg)?;
                let ok = out.diagnostics.converged;
                windows.push(out.diagnostics);
                if !ok {
                    if len <= min_w * (1.0 + 1e-9) {
                        status = RunStatus::ContractionFailed;
                        break;
                    }
                    w = snap(len / 2.0).max(min_w);
                    continue;
                }
                for s in &out.states[1..] {
                    if let Some(n) = overflowed(s, cfg) {
                        status = RunStatus::NormOverflow;
                        overflow = Some((s.t, n));
                        break 'outer;
                    }
                    rec.offer(s)?;
                }
                state = out.states.last().expect("window has nodes").clone();
                forcing.release_before(state.t);
                w = snap((2.0 * w).min(t_loc));
            }
        }
        Integrator::Etd => {
            let full = EtdStepper::new(initial.grid(), cfg.h, cfg)?;
            while state.t < t_final - eps {
                let rest = t_final - state.t;
                let next = if rest < cfg.h * (1.0 - 1e-9) && !stochastic {
                    EtdStepper::new(initial.grid(), rest, cfg)?.step(&state, forcing, cfg)
                } else {
                    full.step(&state, forcing, cfg)
                };
                let next = match next {
                    Ok(s) => s,
                    Err(Error::NonFinite(_)) => {
                        status = RunStatus::NormOverflow;
                        overflow = Some((state.t + cfg.h, f64::INFINITY));
                        break;
                    }
                    Err(e) => return Err(e),
                };
                if let Some(n) = overflowed(&next, cfg) {
                    status = RunStatus::NormOverflow;
                    overflow = Some((next.t, n));
                    break;
                }
                rec.offer(&next)?;
                state = next;
                forcing.release_before(state.t);
            }
        }
    }
    if status == RunStatus::Completed {
        rec.push(&state)?;
    }
    let traj = Trajectory { states: rec.states, windows, status, t_end: state.t, overflow };
    Ok((traj, rec.energies))
}
