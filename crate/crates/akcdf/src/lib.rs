//! Asymmetric-kernel estimators of distribution functions on `[0, inf)`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::upper_case_acronyms)]

pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod quadrature;
pub mod distributions;
pub mod estimators;
pub mod bandwidth;
pub mod asymptotics;
pub mod simharness;
