//! Iterative Boltzmann inversion for pair potentials of Lennard-Jones type,
//! with the cluster-expansion forward model, Monte Carlo sampling and
//! certified bound checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod convolution;
pub mod error;
pub mod forward;
pub mod gcmc;
pub mod ibi;
pub mod potentials;
pub mod report;
pub mod spaces;

pub use error::{Error, Result};
pub use report::InequalityReport;
