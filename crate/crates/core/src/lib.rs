//! Exact and numeric machinery around the modular Cauchy kernel of Γ₀(N).
//!
//! The crate is layered bottom-up:
//!
//! - [`arith`]: multiplicative functions, modular inverses, Kloosterman sums
//!   and the classical identities they satisfy.
//! - [`special`]: Bessel functions `I₁`, `J₁` by ascending series in
//!   double-double precision.
//! - [`qseries`]: exact truncated Laurent series in one and two variables,
//!   eta quotients and the `j`-function.
//! - [`hauptmodul`]: normalized Hauptmoduls `J_N = q⁻¹ + O(q)` for the
//!   genus-zero levels.
//! - [`kernels`]: weight-2 Eisenstein and Poincaré coefficients (Rademacher
//!   type Kloosterman–Bessel sums) and the two-variable kernel expansion.
//! - [`hecke`]: Hecke operators on q-expansions.
//! - [`borcherds`]: exact verification of the product formula for
//!   `J_N(p) − J_N(q)`.

pub mod arith;
pub mod borcherds;
mod error;
pub mod hauptmodul;
pub mod hecke;
pub mod kernels;
pub mod numeric;
pub mod qseries;
pub mod special;

pub use error::{Error, Result};
