//! Numerical toolkit for the weakly forced Bonhoeffer–van der Pol oscillator:
//! model charts, a stiff integrator with event location, slow-flow and canard
//! analysis, and classification of mixed-mode oscillations.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// failed integrations carry their partial trajectory
#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod canard;
pub mod error;
pub mod integrate;
pub mod models;
pub mod numeric;
pub mod parallel;
pub mod slowfast;

pub use error::{Error, Result};

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;
