use super::{all_finite, inf_norm, Objective, OptimizeReport, StopReason};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    pub step: f64,
    pub gtol: f64,
    /// Consecutive value increases that count as divergence.
    pub divergence_window: usize,
}

impl GdParams {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }
}

impl Default for GdParams {
    fn default() -> Self {
        Self {
            step: 0.01,
            gtol: 1e-5,
            divergence_window: 5,
        }
    }
}

/// Fixed-step full-batch gradient descent, `x <- x - step * grad(x)`.
/// Returns the best visited iterate.
pub fn gd_minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    budget: usize,
    params: &GdParams,
) -> Result<(Vec<f64>, OptimizeReport)> {
    if x0.len() != obj.dim() {
        return Err(Error::lengths("gd_minimize", obj.dim(), x0.len()));
    }
    if !(params.step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gradient-descent step must be > 0, got {}",
            params.step
        )));
    }

    let mut x = x0.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut value = obj.evaluate(&x, &mut grad);
    if !value.is_finite() || !all_finite(&grad) {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut best = (x.clone(), value, grad.clone());
    let mut increases = 0;
    let mut iterations = 0;

    let reason = loop {
        if inf_norm(&grad) <= params.gtol {
            break StopReason::GradientTolerance;
        }
        if iterations >= budget {
            break StopReason::Budget;
        }
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= params.step * gi;
        }
        let previous = value;
        value = obj.evaluate(&x, &mut grad);
        iterations += 1;
        if !value.is_finite() || !all_finite(&grad) {
            return Err(Error::NonFiniteObjective {
                iteration: iterations,
            });
        }
        if value < best.1 {
            best = (x.clone(), value, grad.clone());
        }
        if value > previous {
            increases += 1;
            if increases >= params.divergence_window {
                break StopReason::Divergence;
            }
        } else {
            increases = 0;
        }
    };

    let (x, value, grad) = best;
    let report = OptimizeReport::new(iterations, iterations + 1, value, &grad, reason);
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    fn square() -> impl Objective {
        FnObjective::new(
            1,
            |x: &[f64]| x[0] * x[0],
            |x: &[f64], g: &mut [f64]| g[0] = 2.0 * x[0],
        )
    }

    #[test]
    fn zero_budget_is_noop() {
        let (x, r) = gd_minimize(&square(), &[1.0], 0, &GdParams::with_step(0.4)).unwrap();
        assert_eq!(x, vec![1.0]);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn contracts_by_closed_form_factor() {
        // x_k = (1 - 2 * 0.4)^k
        let (x, r) = gd_minimize(&square(), &[1.0], 3, &GdParams::with_step(0.4)).unwrap();
        assert!((x[0] - 0.008).abs() < 1e-15);
        assert_eq!(r.iterations, 3);
        assert_eq!(r.stop_reason, StopReason::Budget);
    }

    #[test]
    fn flags_divergence_and_keeps_start() {
        let (x, r) = gd_minimize(&square(), &[1.0], 100, &GdParams::with_step(1.5)).unwrap();
        assert_eq!(r.stop_reason, StopReason::Divergence);
        assert_eq!(r.iterations, 5);
        assert_eq!(x, vec![1.0]);
        assert_eq!(r.final_value, 1.0);
    }

    #[test]
    fn rejects_non_positive_step() {
        assert!(gd_minimize(&square(), &[1.0], 1, &GdParams::with_step(0.0)).is_err());
    }
}
