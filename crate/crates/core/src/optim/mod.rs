//! Full-batch gradient minimizers.

mod gd;
mod lbfgs;
mod line_search;

use serde::{Deserialize, Serialize};

pub use gd::{gd_minimize, GdParams};
pub use lbfgs::{lbfgs_minimize, LbfgsParams};
pub use line_search::LineSearchParams;

/// A differentiable objective. `evaluate` writes the gradient into `grad`
/// and returns the value.
pub trait Objective {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// Adapts a value closure and a gradient closure into an [`Objective`].
pub struct FnObjective<F, G> {
    dim: usize,
    f: F,
    g: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F, g: G) -> Self {
        Self { dim, f, g }
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (self.g)(x, grad);
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradientTolerance,
    ValueStagnation,
    Budget,
    LineSearchFailure,
    Divergence,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            StopReason::GradientTolerance | StopReason::ValueStagnation
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub iterations: usize,
    pub evaluations: usize,
    pub final_value: f64,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl OptimizeReport {
    pub(crate) fn new(
        iterations: usize,
        evaluations: usize,
        final_value: f64,
        grad: &[f64],
        stop_reason: StopReason,
    ) -> Self {
        Self {
            iterations,
            evaluations,
            final_value,
            final_grad_norm: inf_norm(grad),
            converged: stop_reason.is_converged(),
            stop_reason,
        }
    }
}

#[inline]
pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[inline]
pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
