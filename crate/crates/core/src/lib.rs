// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catseq;
pub mod cli;
pub mod config;
pub mod crystal;
pub mod error;
pub mod experiment;
pub mod hilbert;
pub mod molecule;
pub mod units;
pub mod vibsolver;

pub use error::{Error, Result};
