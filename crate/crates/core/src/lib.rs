//! Muckenhoupt constants, maximal and Hilbert operators, majorant
//! constructions and an exact calculus of regularity indices, all on
//! one-dimensional discretized weights.

// `!(x > 0.0)` is the NaN-rejecting form of the domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod grid;
pub mod instances;
pub mod majorants;
pub mod operators;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{average, Grid, Interval, PrefixSums};
pub use weights::{ConstantsReport, Weight};
