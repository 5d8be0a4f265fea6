//! Two-stage exponential time differencing (Cox–Matthews ETD2RK) with the exact
//! linear flow of each mode.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{FourierGrid, C64};
use crate::propagators::{duhamel_moments, flow_table, ModeSymbol, PhaseState};

use super::{nonlinear_term, Forcing, SolverConfig};

/// Precomputed flow and weights for one step length.
#[derive(Debug, Clone)]
pub struct EtdStepper {
    h: f64,
    flow: Arc<Vec<[f64; 4]>>,
    /// `∫₀ʰ m(h−u) du` per mode, rows `(v, ∂tv)`.
    w0: Vec<[f64; 2]>,
    /// `∫₀ʰ m(h−u)(u/h) du`.
    w1: Vec<[f64; 2]>,
}

impl EtdStepper {
    pub fn new(grid: &FourierGrid, h: f64, cfg: &SolverConfig) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return invalid(format!("step must be positive, got {h}"));
        }
        let flow = flow_table(grid, h, cfg.damping);
        let (w0, w1) = grid
            .multipliers()
            .d
            .iter()
            .map(|&d| {
                let m = duhamel_moments(ModeSymbol::new(d, cfg.damping), h);
                (m[0], m[1])
            })
            .unzip();
        Ok(EtdStepper { h, flow, w0, w1 })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn combine(&self, x: &PhaseState, parts: &[(&[[f64; 2]], f64, &SpectralField)], t: f64) -> PhaseState {
        let g = x.grid();
        let n = g.len();
        let mut v = vec![C64::new(0.0, 0.0); n];
        let mut vt = vec![C64::new(0.0, 0.0); n];
        let (a, b) = (x.v.coeffs(), x.vt.coeffs());
        for i in 0..n {
            let f = self.flow[i];
            let mut p = a[i] * f[0] + b[i] * f[1];
            let mut q = a[i] * f[2] + b[i] * f[3];
            for (w, c, term) in parts {
                let nk = term.coeffs()[i] * *c;
                p += nk * w[i][0];
                q += nk * w[i][1];
            }
            v[i] = p;
            vt[i] = q;
        }
        let herm = x.v.is_hermitian() && x.vt.is_hermitian() && parts.iter().all(|p| p.2.is_hermitian());
        let mut fv = SpectralField::from_coeffs(g, v, false).expect("lattice shape");
        let mut fvt = SpectralField::from_coeffs(g, vt, false).expect("lattice shape");
        fv.set_hermitian_flag(herm);
        fvt.set_hermitian_flag(herm);
        PhaseState { t, v: fv, vt: fvt }
    }

    /// One step from `state.t` to `state.t + h`.
    pub fn step(&self, state: &PhaseState, forcing: &mut Forcing, cfg: &SolverConfig) -> Result<PhaseState> {
        let t1 = state.t + self.h;
        if cfg.sign.coefficient() == 0.0 {
            return Ok(self.combine(state, &[], t1));
        }
        let f0 = forcing.sample(state.t)?;
        let f1 = forcing.sample(t1)?;
        let n0 = nonlinear_term(&state.v, f0.as_ref(), cfg)?;
        let pred = self.combine(state, &[(&self.w0, 1.0, &n0)], t1);
        let na = nonlinear_term(&pred.v, f1.as_ref(), cfg)?;
        let dn = na.sub(&n0);
        let out = self.combine(state, &[(&self.w0, 1.0, &n0), (&self.w1, 1.0, &dn)], t1);
        if !out.is_finite() {
            return Err(Error::NonFinite("exponential integrator step"));
        }
        Ok(out)
    }
}

/// Single step of length `h`; see [`EtdStepper`] for repeated steps.
pub fn step_etd(state: &PhaseState, h: f64, forcing: &mut Forcing, cfg: &SolverConfig) -> Result<PhaseState> {
    EtdStepper::new(state.grid(), h, cfg)?.step(state, forcing, cfg)
}
