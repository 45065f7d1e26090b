use super::{all_finite, Objective};
use crate::error::{Error, Result};
use crate::linalg::dot;

/// Backtracking line search on the Armijo condition with an optional
/// strong-Wolfe curvature check.
///
/// When the curvature check is enabled and a trial step satisfies Armijo but
/// not `|phi'(a)| <= c2 |phi'(0)|`, the step is refined by secant
/// interpolation of the directional derivative (exact on quadratics). At
/// most `max_refinements` such evaluations are spent before the best
/// Armijo step is accepted, which bounds the cost on piecewise-smooth
/// objectives where the curvature test may never pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub c1: f64,
    pub curvature: Option<f64>,
    pub max_refinements: usize,
    pub max_evals: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            curvature: Some(0.01),
            max_refinements: 3,
            max_evals: 30,
        }
    }
}

pub(crate) struct Step {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
}

pub(crate) struct Outcome {
    pub step: Option<Step>,
    pub evaluations: usize,
}

struct Trial {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn search<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    f0: f64,
    g0: &[f64],
    dir: &[f64],
    alpha0: f64,
    params: &LineSearchParams,
    iteration: usize,
) -> Result<Outcome> {
    let slope0 = dot(g0, dir);
    debug_assert!(slope0 < 0.0);
    let eval = |alpha: f64| -> Result<Trial> {
        let x: Vec<f64> = x0.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        let mut grad = vec![0.0; x.len()];
        let value = obj.evaluate(&x, &mut grad);
        if !value.is_finite() || !all_finite(&grad) {
            return Err(Error::NonFiniteObjective { iteration });
        }
        let slope = dot(&grad, dir);
        Ok(Trial {
            alpha,
            value,
            slope,
            x,
            grad,
        })
    };
    let armijo = |t: &Trial| t.value <= f0 + params.c1 * t.alpha * slope0;

    let mut evaluations = 0;
    let mut refinements = 0;
    let mut alpha = alpha0;
    // Best Armijo-satisfying trial so far.
    let mut best: Option<Trial> = None;
    // Bracket on the step, with the slope known at each end.
    let mut lo = (0.0, slope0);
    let mut hi: Option<(f64, f64)> = None;

    while evaluations < params.max_evals {
        if best.is_some() {
            if refinements == params.max_refinements {
                break;
            }
            refinements += 1;
        }
        let t = eval(alpha)?;
        evaluations += 1;

        if !armijo(&t) && best.is_some() {
            // Overshot while refining: shrink the bracket from above.
            hi = Some((t.alpha, t.slope));
            alpha = bracket_step(lo, hi.expect("just set"));
            continue;
        }
        if !armijo(&t) {
            // Quadratic fit through phi(0), phi'(0), phi(alpha).
            let denom = 2.0 * (t.value - f0 - slope0 * t.alpha);
            let fit = if denom > 0.0 {
                -slope0 * t.alpha * t.alpha / denom
            } else {
                0.5 * t.alpha
            };
            hi = Some((t.alpha, t.slope));
            alpha = fit.clamp(0.1 * t.alpha, 0.5 * t.alpha);
            if alpha <= f64::EPSILON * alpha0.max(1.0) {
                break;
            }
            continue;
        }

        let Some(c2) = params.curvature else {
            return Ok(Outcome {
                step: Some(into_step(t)),
                evaluations,
            });
        };
        if t.slope.abs() <= c2 * slope0.abs() {
            return Ok(Outcome {
                step: Some(into_step(t)),
                evaluations,
            });
        }

        let (a, s) = (t.alpha, t.slope);
        if best.as_ref().is_none_or(|b| t.value <= b.value) {
            best = Some(t);
        }
        if s < 0.0 {
            lo = (a, s);
        } else {
            hi = Some((a, s));
        }
        alpha = match hi {
            Some(h) => bracket_step(lo, h),
            None => {
                // Still descending: extrapolate along the secant, at most 4x.
                let secant = lo.0 - lo.1 * (lo.0 - 0.0) / (lo.1 - slope0);
                if secant.is_finite() && secant > lo.0 {
                    secant.min(4.0 * lo.0)
                } else {
                    4.0 * lo.0
                }
            }
        };
    }

    Ok(Outcome {
        step: best.map(into_step),
        evaluations,
    })
}

/// Secant root of the directional derivative inside the bracket, or the
/// midpoint when the secant falls too close to an end.
fn bracket_step(lo: (f64, f64), hi: (f64, f64)) -> f64 {
    let secant = lo.0 - lo.1 * (hi.0 - lo.0) / (hi.1 - lo.1);
    let (l, h) = if lo.0 < hi.0 {
        (lo.0, hi.0)
    } else {
        (hi.0, lo.0)
    };
    let width = h - l;
    if secant.is_finite() && secant > l + 0.01 * width && secant < h - 0.01 * width {
        secant
    } else {
        0.5 * (l + h)
    }
}

fn into_step(t: Trial) -> Step {
    Step {
        alpha: t.alpha,
        x: t.x,
        value: t.value,
        grad: t.grad,
    }
}
