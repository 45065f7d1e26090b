//! Experiment engine for integer RVFL networks with prototype readouts:
//! dataset loading, stratified cross-validation, grid search, multi-seed
//! benchmarks and paired comparisons.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod folds;
pub mod grid;
pub mod pipeline;
pub mod report;

pub use error::{HarnessError, Result};
