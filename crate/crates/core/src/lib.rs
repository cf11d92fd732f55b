//! Fourier multipliers obtained by modulating the jumps of symmetric Lévy
//! processes.
//!
//! The crate evaluates the symbols `M(ξ) = ∫(cos ξ·z − 1)φ(z)V(dz) / ∫(cos ξ·z − 1)V(dz)`,
//! applies them to periodic grid functions, materializes the planar singular
//! kernel of the Cauchy case, and checks the underlying martingale
//! construction by Monte Carlo.

pub mod cli;
pub mod error;
pub mod kernel;
pub mod levy_measure;
pub mod quadrature;
pub mod schema;
pub mod stochastic;
pub mod symbol;
pub mod transform;

pub use error::{Error, Result};
