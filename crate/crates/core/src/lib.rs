//! Numerical tools for band-limited functions with spectrum in a finite
//! union of intervals, sampled on uniformly discrete sets.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod concentration;
pub mod constructions;
pub mod error;
pub mod gram;
pub mod lattice;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;
pub mod spectrum;
pub mod width;

pub use error::{Error, Result};
