//! Exact mode-wise linear flow of `∂t²v + (1−Δ)v + D∂tv = 0` and related
//! multipliers: `S(t)`, `∂tS(t)`, the Poisson kernel and the half-wave factors.
//!
//! Each mode solves `ψ'' + 2γψ' + (γ²+ω²)ψ = 0` with `γ = |n|/2`,
//! `ω = (1 + ¾|n|²)^{1/2}` in the viscous case, and `γ = 0`, `ω = ⟨n⟩` for the
//! undamped wave equation used as a conservation reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::SpectralField;
use crate::grid::{FourierGrid, C64};
use crate::norms;
use crate::quadrature::{panels_for, TimeQuadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Damping {
    #[default]
    Viscous,
    Undamped,
}

/// Decay rate and frequency of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSymbol {
    pub gamma: f64,
    pub omega: f64,
}

impl ModeSymbol {
    pub fn new(d: f64, damping: Damping) -> Self {
        match damping {
            Damping::Viscous => ModeSymbol { gamma: 0.5 * d, omega: (1.0 + 0.75 * d * d).sqrt() },
            Damping::Undamped => ModeSymbol { gamma: 0.0, omega: (1.0 + d * d).sqrt() },
        }
    }

    pub fn lambda(&self) -> C64 {
        C64::new(-self.gamma, self.omega)
    }
}

/// The 2×2 matrix `M_n(t)` mapping `(v̂(0), ∂tv̂(0))` to `(v̂(t), ∂tv̂(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMatrix {
    pub m: [[f64; 2]; 2],
}

impl FlowMatrix {
    pub fn identity() -> Self {
        FlowMatrix { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn from_symbol(sym: ModeSymbol, t: f64) -> Self {
        let ModeSymbol { gamma, omega } = sym;
        let e = (-gamma * t).exp();
        let (s, c) = (omega * t).sin_cos();
        let r = gamma / omega;
        FlowMatrix {
            m: [
                [e * (c + r * s), e * s / omega],
                [-e * (omega * omega + gamma * gamma) / omega * s, e * (c - r * s)],
            ],
        }
    }

    pub fn viscous(d: f64, t: f64) -> Self {
        Self::from_symbol(ModeSymbol::new(d, Damping::Viscous), t)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn mul(&self, o: &FlowMatrix) -> FlowMatrix {
        let a = &self.m;
        let b = &o.m;
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        FlowMatrix { m }
    }

    #[inline]
    pub fn apply(&self, x: C64, y: C64) -> (C64, C64) {
        (x * self.m[0][0] + y * self.m[0][1], x * self.m[1][0] + y * self.m[1][1])
    }

    pub fn as_row(&self) -> [f64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_row(r: [f64; 4]) -> Self {
        FlowMatrix { m: [[r[0], r[1]], [r[2], r[3]]] }
    }
}

/// Viscous flow matrix for frequency `n` at time `t ≥ 0`.
pub fn mode_flow(n: [i64; 2], t: f64) -> Result<FlowMatrix> {
    if !(t >= 0.0) {
        return invalid(format!("flow time must be >= 0, got {t}"));
    }
    let d = ((n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
    Ok(FlowMatrix::viscous(d, t))
}

/// Flow matrices for every mode of the grid, cached per `(t, damping)`.
pub fn flow_table(grid: &FourierGrid, t: f64, damping: Damping) -> std::sync::Arc<Vec<[f64; 4]>> {
    let kind = match damping {
        Damping::Viscous => 0,
        Damping::Undamped => 1,
    };
    grid.cached_table(t, kind, || {
        grid.multipliers()
            .d
            .iter()
            .map(|&d| FlowMatrix::from_symbol(ModeSymbol::new(d, damping), t).as_row())
            .collect()
    })
}

/// The pair `(v, ∂tv)` at time `t`.
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub t: f64,
    pub v: SpectralField,
    pub vt: SpectralField,
}

impl PhaseState {
    pub fn new(t: f64, v: SpectralField, vt: SpectralField) -> Result<Self> {
        v.check_grid(&vt)?;
        Ok(PhaseState { t, v, vt })
    }

    pub fn zeros(grid: &std::sync::Arc<FourierGrid>) -> Self {
        PhaseState { t: 0.0, v: SpectralField::zeros(grid), vt: SpectralField::zeros(grid) }
    }

    pub fn grid(&self) -> &std::sync::Arc<FourierGrid> {
        self.v.grid()
    }

    /// `‖(v, ∂tv)‖` in `H^s × H^{s−1}`.
    pub fn norm(&self, s: f64) -> f64 {
        norms::pair_sobolev(&self.v, &self.vt, s)
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.vt.is_finite()
    }
}

/// Applies per-mode matrices to a state.
pub fn apply_table(state: &PhaseState, table: &[[f64; 4]], t_new: f64) -> PhaseState {
    let mut v = state.v.clone();
    let mut vt = state.vt.clone();
    {
        let a = v.coeffs_mut_keep();
        let b = vt.coeffs_mut_keep();
        for i in 0..a.len() {
            let m = FlowMatrix::from_row(table[i]);
            let (x, y) = m.apply(a[i], b[i]);
            a[i] = x;
            b[i] = y;
        }
    }
    PhaseState { t: t_new, v, vt }
}

/// `V(t)`: advances both components by `M_n(t)`.
pub fn apply_v(state: &PhaseState, t: f64) -> Result<PhaseState> {
    apply_v_damped(state, t, Damping::Viscous)
}

pub fn apply_v_damped(state: &PhaseState, t: f64, damping: Damping) -> Result<PhaseState> {
    if !(t >= 0.0) {
        return invalid(format!("flow time must be >= 0, got {t}"));
    }
    let table = flow_table(state.grid(), t, damping);
    Ok(apply_table(state, &table, state.t + t))
}

/// Multiplies by `m01(t)` (the kernel of `S(t)`) or, with `derivative`, by `m11(t)`.
pub fn apply_duhamel_kernel(f: &SpectralField, t: f64, derivative: bool) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return invalid(format!("kernel time must be >= 0, got {t}"));
    }
    let table = flow_table(f.grid(), t, Damping::Viscous);
    let col = if derivative { 3 } else { 1 };
    Ok(f.map_real(|i| table[i][col]))
}

/// Poisson multiplier `|n|^β e^{−|n|t/2}`.
pub fn poisson_smooth(f: &SpectralField, t: f64, beta: f64) -> Result<SpectralField> {
    if !(t > 0.0) {
        return invalid(format!("Poisson time must be > 0, got {t}"));
    }
    if !(beta >= 0.0) {
        return invalid(format!("β must be >= 0, got {beta}"));
    }
    let d = f.grid().multipliers().d.clone();
    Ok(f.map_real(|i| {
        let w = if beta == 0.0 { 1.0 } else { d[i].powf(beta) };
        w * (-0.5 * d[i] * t).exp()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    Plus,
    Minus,
}

/// Half-wave multiplier `e^{−|n|t/2 ± i·jbb·t}`.
pub fn half_wave(f: &SpectralField, t: f64, sign: WaveSign) -> SpectralField {
    let g = f.grid().clone();
    let sg = match sign {
        WaveSign::Plus => 1.0,
        WaveSign::Minus => -1.0,
    };
    f.map_complex(|i| {
        let m = g.multipliers();
        Complex64::from_polar((-0.5 * m.d[i] * t).exp(), sg * m.jbb[i] * t)
    })
}

/// `φ_k(z) = Σ_{m≥0} z^m/(m+k)!` for `k = 0..=4`.
pub fn phi_functions(z: C64) -> [C64; 5] {
    let mut out = [C64::new(0.0, 0.0); 5];
    if z.norm() < 1.0 {
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            for j in 1..=k {
                term /= j as f64;
            }
            let mut sum = term;
            for m in 1..40 {
                term = term * z / (m + k) as f64;
                sum += term;
                if term.norm() < 1e-18 * sum.norm() {
                    break;
                }
            }
            *slot = sum;
        }
    } else {
        out[0] = z.exp();
        let mut fact = 1.0;
        for k in 0..4 {
            out[k + 1] = (out[k] - 1.0 / fact) / z;
            fact *= (k + 1) as f64;
        }
    }
    out
}

/// Per-mode Duhamel moments over one step of length `h`:
/// `w[j] = (∫₀ʰ m01(h−u)(u/h)^j du, ∫₀ʰ m11(h−u)(u/h)^j du)` for `j = 0..=3`.
pub fn duhamel_moments(sym: ModeSymbol, h: f64) -> [[f64; 2]; 4] {
    let phi = phi_functions(sym.lambda() * h);
    let mut fact = 1.0;
    let mut out = [[0.0; 2]; 4];
    let r = sym.gamma / sym.omega;
    for j in 0..4 {
        if j > 0 {
            fact *= j as f64;
        }
        let e = phi[j + 1] * (h * fact);
        out[j] = [e.im / sym.omega, e.re - r * e.im];
    }
    out
}

/// Options for the space-time norms of linear evolutions.
#[derive(Debug, Clone, Copy)]
pub struct SpaceTimeNorm {
    pub q: f64,
    pub r: f64,
    /// Derivative order `β` in `‖D^β ·‖`.
    pub beta: f64,
}

/// `‖D^β V(t)(φ₀, φ₁)‖_{L^q([0,T]; L^r)}` (first component), by composite
/// Gauss–Legendre quadrature in time.
pub fn linear_space_time_norm(
    phi0: &SpectralField,
    phi1: &SpectralField,
    norm: SpaceTimeNorm,
    t_end: f64,
    quad: Option<TimeQuadrature>,
) -> Result<f64> {
    let g = phi0.grid().clone();
    let active = phi0
        .coeffs()
        .iter()
        .zip(phi1.coeffs())
        .enumerate()
        .filter(|(_, (a, b))| a.norm() + b.norm() > 0.0)
        .map(|(i, _)| g.jbb(i))
        .fold(1.0, f64::max);
    let quad = quad.unwrap_or_else(|| TimeQuadrature::with_panels(panels_for(t_end, active)));
    let eval = |t: f64| linear_slice_norm(phi0, phi1, norm, t);
    quad.lq_norm(t_end, norm.q, eval)
}

/// `‖D^β V(t)(φ₀, φ₁)‖_{L^r}` at one time.
pub fn linear_slice_norm(phi0: &SpectralField, phi1: &SpectralField, norm: SpaceTimeNorm, t: f64) -> f64 {
    let g = phi0.grid();
    let m = g.multipliers();
    let coeffs: Vec<C64> = (0..g.len())
        .map(|i| {
            let a = phi0.coeffs()[i];
            let b = phi1.coeffs()[i];
            if a.norm_sqr() + b.norm_sqr() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let f = FlowMatrix::viscous(m.d[i], t);
            let w = if norm.beta == 0.0 { 1.0 } else { m.d[i].powf(norm.beta) };
            (a * f.m[0][0] + b * f.m[0][1]) * w
        })
        .collect();
    let herm = phi0.is_hermitian() && phi1.is_hermitian();
    let z = SpectralField::from_coeffs(g, coeffs, false).expect("shape preserved");
    let mut z = z;
    z.set_hermitian_flag(herm);
    norms::lebesgue(&z, norm.r)
}
