//! Readout classifiers over hidden activations.
//!
//! Prototype readouts (centroid, perceptron-refined centroid, GLVQ) classify
//! by the nearest prototype under squared Euclidean distance. The ridge
//! readout scores classes with a linear map.

mod glvq;
mod perceptron;
mod prototype;
mod rls;

pub use glvq::{
    glvq_cost, glvq_fit, glvq_gradient, glvq_mu, GlvqFitReport, GlvqObjective, MuInfo, Optimizer,
};
pub use perceptron::perceptron_refine;
pub use prototype::{centroid_fit, init_prototypes, predict_nearest, PrototypeModel};
pub use rls::{one_hot, rls_fit, rls_predict, LinearReadout, RlsPath, RlsSystem};

use crate::error::{Error, Result};

/// Four independent partial sums let the compiler vectorize the loop; the
/// summation order is fixed, so results stay reproducible.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Squared Euclidean distance.
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::lengths("sq_euclidean", a.len(), b.len()));
    }
    Ok(sq_dist(a, b))
}

/// Index of the largest score, lowest index on ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}
