//! Hardy–Littlewood–Sobolev numerics on the Heisenberg group ℍⁿ.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: group law, dilations, homogeneous norm and ball volume.
//! * [`constants`]: closed-form sharp constants, upper bounds and exponent
//!   bookkeeping ([`HlsParams`]).
//! * [`grid`], [`kernel`], [`operator`]: cylindrically symmetric grid
//!   functions and deterministic quadrature of the fractional integral
//!   `I_λ f(u) = ∫ f(v) |u⁻¹v|^{-λ} dv` for `n = 1`.
//! * [`montecarlo`]: importance-sampled estimates valid for any `n`, plus a
//!   flat Euclidean mode.
//! * [`extremal`]: maximisation of the quotient `‖I_λ f‖_q / ‖f‖_p` with
//!   concentration renormalisation.
//! * [`cc_lab`]: concentration-compactness diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated nodes and coefficients are kept as published.
#![allow(clippy::excessive_precision)]

pub mod cc_lab;
pub mod constants;
pub mod extremal;
pub mod grid;
pub mod group;
pub mod kernel;
pub mod montecarlo;
pub mod operator;
pub mod quadrature;
pub mod special;

mod error;

pub use constants::{EuclideanParams, HlsParams, LiebVariant};
pub use error::{HlsError, Result};
pub use grid::{CylGrid, CylGridFunction, GridSpec};
pub use group::GroupPoint;
