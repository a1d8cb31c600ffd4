//! Numerical laboratory for the risk-adjusted pricing methodology (RAPM)
//! equation
//!
//! ```text
//! u_t + ½σ²S²u_SS (1 − μ (S u_SS)^{1/3}) − r u + r S u_S = 0,   μ = 3 (C²R / 2π)^{1/3}
//! ```
//!
//! The crate covers the model constants and admissibility checks ([`model`]),
//! the quartic root machinery shared by all reductions ([`quartic`]), exact and
//! parametric invariant solutions ([`invariant`]), a Lie-algebra verifier
//! ([`symmetry`]), a residual evaluator plus an independent finite-difference
//! solver ([`pde`]) and a delta-hedging Monte Carlo ([`hedging`]).
//!
//! Every fractional power `x^{1/3}` of a possibly negative quantity is the
//! real, odd cube root (`f64::cbrt`).

// `!(x > 0.0)` is deliberate throughout: NaN must fail positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hedging;
pub mod invariant;
pub mod model;
pub mod optimize;
pub mod pde;
pub mod quadrature;
pub mod quartic;
pub mod symmetry;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use pde::{GridSpec, Jet, Surface};
