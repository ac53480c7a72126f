// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exprlang;
pub mod front;
pub mod jet;
pub mod layer;
pub mod problem;
pub mod quadrature;
pub mod refsolve;
pub mod residual;

pub use error::{Error, Result};
