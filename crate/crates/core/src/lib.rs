//! Intermittency fronts of the stochastic heat equation with colored noise:
//! closed-form bounds plus a Feynman-Kac Monte Carlo witness.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod quad;
pub mod special_fn;
pub mod spectral;
pub mod bounds;
pub mod cli;
pub mod feynman_kac;
pub mod front_lab;

pub use error::{Error, Result};
