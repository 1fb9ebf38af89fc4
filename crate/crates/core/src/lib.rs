// NaN-rejecting guards are written `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod precision;
pub mod coeffs;
pub mod operator;
pub mod normlab;
pub mod domain;

pub use error::{Error, Result};
pub use precision::{PrecisionContext, Real};
