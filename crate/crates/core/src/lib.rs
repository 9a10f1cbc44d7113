//! Elitist (1+1) evolution strategies with success-based step-size control.
//!
//! The crate has four layers:
//!
//! * [`objectives`] — benchmark functions together with their exact geometry:
//!   the optimum, the spatial suboptimality function (d-th root of the
//!   sublevel-set volume) and the inner/outer ball constants.
//! * [`sampling`] — deterministic seeded random streams, multivariate Gaussian
//!   sampling, and maintenance of covariance matrices inside the set of
//!   unit-determinant matrices with bounded condition number.
//! * [`strategies`] — the optimizers themselves: the (1+1)-ES with the
//!   generalized one-fifth success rule, its covariance-adapting variant,
//!   simplified direct search, random pursuit, and gradientless descent.
//! * [`theory`] — success probabilities and their bounds, the potential
//!   function, drift constants, hitting-time bounds and Monte-Carlo verifiers
//!   for the two additive-drift theorems.
//!
//! Everything is `no_std` compatible (with `alloc`); file formats, CSV
//! emission and the command line live in the companion `onefifth-cli` crate.

#![cfg_attr(not(test), no_std)]
// Validations use `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod objectives;
pub mod sampling;
pub mod strategies;
pub mod theory;
pub mod trace;

pub use error::{Error, Result};
