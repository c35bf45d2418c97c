//! Multi-objective adaptive-order Caputo fractional gradient descent.

// `!(a < b)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod clock;
pub mod direction;
pub mod error;
pub mod fractional;
pub mod lab;
pub mod model;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
