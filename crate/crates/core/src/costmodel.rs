//! Analytic flop counts for training the three readouts.
//!
//! `T` is the number of training samples, `N` the hidden dimension, `L` the
//! number of classes, `P` prototypes per class and `I` optimizer iterations.
//! Counts are real-valued because of the `N³/3` terms.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    pub t: usize,
    pub n: usize,
    pub l: usize,
    pub p: usize,
    pub i: usize,
}

impl CostInputs {
    pub fn new(t: usize, n: usize, l: usize, p: usize, i: usize) -> Self {
        Self { t, n, l, p, i }
    }

    fn as_f64(&self) -> (f64, f64, f64, f64, f64) {
        (
            self.t as f64,
            self.n as f64,
            self.l as f64,
            self.p as f64,
            self.i as f64,
        )
    }
}

/// Per-step flop counts for one training procedure, in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCosts {
    pub steps: Vec<(&'static str, f64)>,
}

impl StepCosts {
    pub fn total(&self) -> f64 {
        self.steps.iter().map(|(_, c)| c).sum()
    }
}

/// Ridge readout through an explicit inverse of `HᵀH + λI`.
pub fn flops_rls_direct(c: &CostInputs) -> f64 {
    let (t, n, l, _, _) = c.as_f64();
    n * (2.0 * n * n / 3.0 + 4.0 * t * n + 2.0 * t * l - n - t - l + 2.0)
}

pub fn steps_rls_direct(c: &CostInputs) -> StepCosts {
    let (t, n, l, _, _) = c.as_f64();
    StepCosts {
        steps: vec![
            ("gram plus ridge", n * (2.0 * t * n - n + 2.0)),
            ("inverse", 2.0 * n.powi(3) / 3.0),
            (
                "apply inverse",
                t * n * (2.0 * n - 1.0) + l * n * (2.0 * t - 1.0),
            ),
        ],
    }
}

/// Ridge readout through a QR factorization of `HᵀH + λI`.
pub fn flops_rls_qr(c: &CostInputs) -> f64 {
    let (t, n, l, _, _) = c.as_f64();
    n * (4.0 * n * n / 3.0 + 2.0 * t * n + 2.0 * t * l + 3.0 * l * n - n - 3.0 * l + 2.0)
}

pub fn steps_rls_qr(c: &CostInputs) -> StepCosts {
    let (t, n, l, _, _) = c.as_f64();
    StepCosts {
        steps: vec![
            ("right-hand side", l * n * (2.0 * t - 1.0)),
            (
                "factor",
                n * (2.0 * t * n - n + 2.0) + 4.0 * n.powi(3) / 3.0,
            ),
            ("solve", 2.0 * l * n * (n - 1.0) + l * n * n),
        ],
    }
}

/// GLVQ readout: centroid initialization plus `I` full-batch iterations.
pub fn flops_glvq(c: &CostInputs) -> f64 {
    let (t, n, l, p, i) = c.as_f64();
    i * t * (3.0 * p * l * n + 6.0 * n + 19.0) + t * n
}

pub fn steps_glvq(c: &CostInputs) -> StepCosts {
    let (t, n, l, p, i) = c.as_f64();
    StepCosts {
        steps: vec![
            ("initialization", t * n),
            ("distances", i * t * p * l * (3.0 * n - 1.0)),
            ("prototype update", i * t * (6.0 * n + p * l + 19.0)),
        ],
    }
}

/// Costs relative to the straightforward ridge readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeCost {
    pub qr_ratio: f64,
    pub glvq_ratio: f64,
}

pub fn relative_cost(c: &CostInputs) -> RelativeCost {
    let direct = flops_rls_direct(c);
    RelativeCost {
        qr_ratio: flops_rls_qr(c) / direct,
        glvq_ratio: flops_glvq(c) / direct,
    }
}
