// NaN-rejecting `!(x > y)` checks and index loops over tableaux are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod data;
pub mod distributions;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod prediction;
pub mod propriety;
pub mod quadrature;
pub mod sampler;
pub mod selection;
pub mod simstudy;

pub use error::{Error, Result};
