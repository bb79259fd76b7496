//! Gaussian-to-μ monotone transport, Bass's Skorokhod embedding and numerical
//! verification of the Brascamp–Lieb moment inequality with variance-based
//! error terms, in one dimension.
//!
//! Multidimensional problems must be projected to v·X by the caller.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convex;
pub mod embedding;
pub mod error;
pub mod gaussian;
pub mod local_time;
pub mod potentials;
pub mod quadrature;
pub mod report;
pub mod transport;
pub mod verifier;

pub use error::{Error, Result};
