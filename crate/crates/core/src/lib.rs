//! Numerical laboratory for the linear thermoelastic plate system
//!
//! ```text
//! u_tt + Δ²u + Δθ = 0,    θ_t − Δθ − Δu_t = 0
//! ```
//!
//! written as a first-order system for `U = (u, u_t, θ)`. The crate provides the
//! closed-form whole-space symbol calculus, empirical multiplier-class scans, an
//! FFT realization of the semigroup on a periodic torus, and finite-difference
//! generators with free boundary conditions on intervals and rectangles.

extern crate openblas_src;

pub mod bounded;
pub mod error;
pub mod multiplier;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::{
    characteristic_roots, determinant, resolvent_matrix, roots, scaled_resolvent_symbol,
    scaling_matrix, symbol_matrix, CharacteristicRoots, SpectralPoint, SymbolMatrix,
};
