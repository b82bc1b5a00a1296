//! Damped wave semiflows on truncated boxes, volume tracking of the linearized
//! flow, weighted spectral problems and analytic dimension bounds for compact
//! invariant sets.
//!
//! The pieces fit together as follows:
//!
//! * [`discretization`] builds the finite-difference operator `A = -Δ + β` with
//!   Dirichlet conditions and the energy inner product on `H¹₀ × L²`.
//! * [`model`] holds the nonlinearity `f(x, u)`, its growth data and the weight
//!   potential `W` used by the spectral estimates.
//! * [`semiflow`] integrates `u_tt + α u_t + A u = f(x, u)` and samples
//!   post-transient states.
//! * [`tangent`] evolves tangent frames, tracks d-volumes and evaluates the
//!   trace of the reduced operator in δ-shifted coordinates.
//! * [`spectral`] solves `A φ = λ W² φ`, counts eigenvalues and audits the
//!   CLR-type bound.
//! * [`bounds`] evaluates the closed-form dimension estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod bounds;
pub mod discretization;
pub mod error;
pub mod export;
pub mod linalg;
pub mod model;
pub mod semiflow;
pub mod spectral;
pub mod state;
pub mod tangent;

pub use error::{Error, Result};
pub use state::State;
