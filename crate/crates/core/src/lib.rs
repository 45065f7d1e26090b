//! Prototype-based readouts for randomized networks.
//!
//! The crate is split along the training pipeline:
//!
//! - [`encoder`]: thermometer quantization, bipolar input weights and the
//!   integer (bind, bundle, clip) hidden layer, plus a logistic RVFL layer.
//! - [`classifiers`]: centroid, perceptron-refined centroid and GLVQ readouts
//!   over hidden activations, and the ridge (RLS) linear readout.
//! - [`optim`]: L-BFGS and fixed-step gradient descent.
//! - [`costmodel`]: closed-form flop counts for training the readouts.
//! - [`linalg`]: the small dense kernel used by the ridge readout.
//!
//! Class indices are zero-based throughout.

pub mod classifiers;
pub mod costmodel;
pub mod encoder;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod seed;

pub use error::{Error, Result};
pub use linalg::Matrix;
