use std::collections::VecDeque;

use super::line_search::{self, LineSearchParams};
use super::{all_finite, inf_norm, Objective, OptimizeReport, StopReason};
use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    /// Number of (step, gradient change) pairs kept.
    pub memory: usize,
    /// Stop when `max |grad_i| <= gtol`.
    pub gtol: f64,
    /// Stop when `(f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= ftol`.
    pub ftol: f64,
    pub line_search: LineSearchParams,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            memory: 10,
            gtol: 1e-5,
            ftol: 2.220_446_049_250_313e-9,
            line_search: LineSearchParams::default(),
        }
    }
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g` for the implicit inverse Hessian `H`.
fn direction(grad: &[f64], history: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for p in history.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        q.iter_mut().zip(&p.y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for (p, a) in history.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        q.iter_mut()
            .zip(&p.s)
            .for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Limited-memory BFGS. At most `budget` iterations are performed; each
/// iteration accepts exactly one line-search step, so the returned point is
/// always the lowest value visited.
pub fn lbfgs_minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    budget: usize,
    params: &LbfgsParams,
) -> Result<(Vec<f64>, OptimizeReport)> {
    if x0.len() != obj.dim() {
        return Err(Error::lengths("lbfgs_minimize", obj.dim(), x0.len()));
    }
    if params.memory == 0 {
        return Err(Error::InvalidArgument("L-BFGS memory must be >= 1".into()));
    }

    let mut x = x0.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut value = obj.evaluate(&x, &mut grad);
    if !value.is_finite() || !all_finite(&grad) {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut evaluations = 1;
    let mut history: VecDeque<Pair> = VecDeque::with_capacity(params.memory);
    let mut iterations = 0;

    let reason = loop {
        if inf_norm(&grad) <= params.gtol {
            break StopReason::GradientTolerance;
        }
        if iterations >= budget {
            break StopReason::Budget;
        }

        let mut dir = direction(&grad, &history);
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&dir, &grad);
        }
        let alpha0 = if history.is_empty() {
            (1.0 / (-slope).sqrt()).min(1.0)
        } else {
            1.0
        };

        let outcome = line_search::search(
            obj,
            &x,
            value,
            &grad,
            &dir,
            alpha0,
            &params.line_search,
            iterations + 1,
        )?;
        evaluations += outcome.evaluations;
        log::trace!(
            "lbfgs it {} f {value:.6e} |g| {:.3e} evals {} alpha {:?}",
            iterations + 1,
            inf_norm(&grad),
            outcome.evaluations,
            outcome.step.as_ref().map(|s| s.alpha)
        );
        let Some(step) = outcome.step else {
            if history.is_empty() {
                break StopReason::LineSearchFailure;
            }
            // Retry once along steepest descent before giving up.
            history.clear();
            continue;
        };

        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y) {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back(Pair {
                s,
                y,
                rho: 1.0 / sy,
            });
        }

        let previous = value;
        x = step.x;
        grad = step.grad;
        value = step.value;
        iterations += 1;

        if previous - value <= params.ftol * previous.abs().max(value.abs()).max(1.0) {
            break if inf_norm(&grad) <= params.gtol {
                StopReason::GradientTolerance
            } else {
                StopReason::ValueStagnation
            };
        }
    };

    let report = OptimizeReport::new(iterations, evaluations, value, &grad, reason);
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    fn shifted_quadratic(c: Vec<f64>) -> impl Objective {
        let c2 = c.clone();
        FnObjective::new(
            c.len(),
            move |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum(),
            move |x: &[f64], g: &mut [f64]| {
                for ((gi, xi), ci) in g.iter_mut().zip(x).zip(&c2) {
                    *gi = 2.0 * (xi - ci);
                }
            },
        )
    }

    #[test]
    fn scalar_quadratic() {
        let obj = shifted_quadratic(vec![3.0]);
        let (x, report) = lbfgs_minimize(&obj, &[0.0], 100, &LbfgsParams::default()).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-8);
        assert!(report.iterations <= 5);
        assert!(report.converged);
    }

    #[test]
    fn separable_quadratic_10d() {
        let c: Vec<f64> = (0..10).map(|i| i as f64 * 0.7 - 2.0).collect();
        let obj = shifted_quadratic(c.clone());
        let (x, _) = lbfgs_minimize(&obj, &[0.0; 10], 100, &LbfgsParams::default()).unwrap();
        for (a, b) in x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let obj = shifted_quadratic(vec![3.0, 1.0]);
        let (x, report) = lbfgs_minimize(&obj, &[0.0, 0.0], 0, &LbfgsParams::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(report.iterations, 0);
        assert_eq!(report.stop_reason, StopReason::Budget);
        assert!(!report.converged);
    }

    #[test]
    fn nan_objective_is_rejected() {
        let obj = FnObjective::new(
            1,
            |_: &[f64]| f64::NAN,
            |_: &[f64], g: &mut [f64]| g[0] = 1.0,
        );
        assert_eq!(
            lbfgs_minimize(&obj, &[0.0], 10, &LbfgsParams::default()).unwrap_err(),
            Error::NonFiniteObjective { iteration: 0 }
        );
    }
}
