// NaN parameters are rejected by negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fem;
pub mod grid;
pub mod mlf;
pub mod norms;
pub mod quad;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod study;
pub mod tridiag;

pub use error::{Error, Result};
