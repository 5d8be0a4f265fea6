//! Pseudo-spectral simulation and verification toolkit for the viscous
//! nonlinear wave equation on the 2-torus
//!
//! ```text
//! ∂t²u + (1−Δ)u + D∂tu ± |u|^{p−1}u = D^α ξ,   D = |∇|,
//! ```
//!
//! with additive noise, randomized initial data, or no forcing.

pub mod energy;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod noise;
pub mod norms;
pub mod propagators;
pub mod quadrature;
pub mod randomize;
pub mod rng;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::{make_grid, FourierGrid, C64};
pub use propagators::PhaseState;
