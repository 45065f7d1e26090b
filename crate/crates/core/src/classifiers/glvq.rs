//! Generalized LVQ.
//!
//! For a sample `x` with nearest correct prototype `w+` (distance `d+`) and
//! nearest wrong prototype `w-` (distance `d-`), the relative distance
//! difference is `mu = (d+ - d-) / (d+ + d-)` and the cost is
//! `E = sum g(mu)` with `g(z) = 1 / (1 + exp(-beta z))`.
//!
//! The gradient keeps the slope factor from the chain rule,
//! `dg/dmu = beta g (1 - g)`.

use std::cell::Cell;

use log::warn;
use serde::{Deserialize, Serialize};

use super::prototype::PrototypeModel;
use super::sq_dist;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optim::{gd_minimize, lbfgs_minimize, GdParams, LbfgsParams, Objective, OptimizeReport};

#[inline]
fn sigmoid(beta: f64, z: f64) -> f64 {
    1.0 / (1.0 + (-beta * z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuInfo {
    pub mu: f64,
    pub idx_plus: usize,
    pub idx_minus: usize,
    pub d_plus: f64,
    pub d_minus: f64,
}

/// Nearest same-class and other-class prototype indices, lowest index on ties.
fn nearest_pair(distances: &[f64], class_of: &[usize], y: usize) -> Option<(usize, usize)> {
    let mut plus: Option<usize> = None;
    let mut minus: Option<usize> = None;
    for (j, (&d, &c)) in distances.iter().zip(class_of).enumerate() {
        let slot = if c == y { &mut plus } else { &mut minus };
        if slot.is_none_or(|k| d < distances[k]) {
            *slot = Some(j);
        }
    }
    Some((plus?, minus?))
}

pub fn glvq_mu(h: &[f64], model: &PrototypeModel, true_class: usize) -> Result<MuInfo> {
    if h.len() != model.n() {
        return Err(Error::lengths("glvq_mu", model.n(), h.len()));
    }
    let d = model.distances(h);
    let (idx_plus, idx_minus) =
        nearest_pair(&d, model.class_of(), true_class).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "class {true_class} needs a prototype of its own and one of another class"
            ))
        })?;
    let (d_plus, d_minus) = (d[idx_plus], d[idx_minus]);
    let sum = d_plus + d_minus;
    if sum == 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(MuInfo {
        mu: (d_plus - d_minus) / sum,
        idx_plus,
        idx_minus,
        d_plus,
        d_minus,
    })
}

/// GLVQ cost over flattened prototype coordinates.
///
/// Samples whose `d+ + d-` is zero are skipped and counted in
/// [`GlvqObjective::skipped`].
pub struct GlvqObjective<'a> {
    samples: &'a Matrix,
    labels: &'a [usize],
    class_of: &'a [usize],
    beta: f64,
    skipped: Cell<usize>,
}

impl<'a> GlvqObjective<'a> {
    pub fn new(
        model: &'a PrototypeModel,
        samples: &'a Matrix,
        labels: &'a [usize],
    ) -> Result<Self> {
        if samples.cols() != model.n() {
            return Err(Error::shapes(
                "glvq",
                samples.shape(),
                (model.len(), model.n()),
            ));
        }
        if labels.len() != samples.rows() {
            return Err(Error::lengths("glvq labels", samples.rows(), labels.len()));
        }
        if samples.rows() == 0 {
            return Err(Error::InvalidArgument(
                "GLVQ needs at least one sample".into(),
            ));
        }
        if model.l() < 2 {
            return Err(Error::InvalidArgument(
                "GLVQ needs at least two classes".into(),
            ));
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= model.l()) {
            return Err(Error::InvalidArgument(format!("label {c} out of range")));
        }
        Ok(Self {
            samples,
            labels,
            class_of: model.class_of(),
            beta: model.beta(),
            skipped: Cell::new(0),
        })
    }

    /// Degenerate samples skipped by the most recent evaluation.
    pub fn skipped(&self) -> usize {
        self.skipped.get()
    }

    fn accumulate(&self, w: &[f64], mut grad: Option<&mut [f64]>, strict: bool) -> Result<f64> {
        let n = self.samples.cols();
        let mut distances = vec![0.0; self.class_of.len()];
        let mut cost = 0.0;
        let mut skipped = 0;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        for (x, &y) in self.samples.iter_rows().zip(self.labels) {
            for (d, proto) in distances.iter_mut().zip(w.chunks_exact(n)) {
                *d = sq_dist(x, proto);
            }
            let (ip, im) = nearest_pair(&distances, self.class_of, y)
                .expect("class map validated at construction");
            let (dp, dm) = (distances[ip], distances[im]);
            let sum = dp + dm;
            if sum == 0.0 {
                if strict {
                    return Err(Error::DegenerateSample);
                }
                skipped += 1;
                continue;
            }
            let g = sigmoid(self.beta, (dp - dm) / sum);
            cost += g;
            if let Some(grad) = grad.as_deref_mut() {
                let dg = self.beta * g * (1.0 - g);
                let sum2 = sum * sum;
                let coef_plus = -dg * 4.0 * dm / sum2;
                let coef_minus = dg * 4.0 * dp / sum2;
                for ((gv, xv), wv) in grad[ip * n..(ip + 1) * n]
                    .iter_mut()
                    .zip(x)
                    .zip(&w[ip * n..(ip + 1) * n])
                {
                    *gv += coef_plus * (xv - wv);
                }
                for ((gv, xv), wv) in grad[im * n..(im + 1) * n]
                    .iter_mut()
                    .zip(x)
                    .zip(&w[im * n..(im + 1) * n])
                {
                    *gv += coef_minus * (xv - wv);
                }
            }
        }
        self.skipped.set(skipped);
        Ok(cost)
    }
}

impl Objective for GlvqObjective<'_> {
    fn dim(&self) -> usize {
        self.class_of.len() * self.samples.cols()
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.accumulate(x, Some(grad), false)
            .expect("non-strict accumulation does not fail")
    }
}

pub fn glvq_cost(model: &PrototypeModel, samples: &Matrix, labels: &[usize]) -> Result<f64> {
    GlvqObjective::new(model, samples, labels)?.accumulate(model.flat(), None, true)
}

/// Gradient of [`glvq_cost`] with respect to the flattened prototypes.
pub fn glvq_gradient(
    model: &PrototypeModel,
    samples: &Matrix,
    labels: &[usize],
) -> Result<Vec<f64>> {
    let obj = GlvqObjective::new(model, samples, labels)?;
    let mut grad = vec![0.0; obj.dim()];
    obj.accumulate(model.flat(), Some(&mut grad), true)?;
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Lbfgs(LbfgsParams),
    GradientDescent(GdParams),
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Lbfgs(LbfgsParams::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlvqFitReport {
    pub initial_cost: f64,
    #[serde(flatten)]
    pub optimize: OptimizeReport,
    pub skipped_samples: usize,
}

/// Minimizes the GLVQ cost from `init` for at most `budget` iterations.
pub fn glvq_fit(
    samples: &Matrix,
    labels: &[usize],
    init: &PrototypeModel,
    budget: usize,
    optimizer: &Optimizer,
) -> Result<(PrototypeModel, GlvqFitReport)> {
    let obj = GlvqObjective::new(init, samples, labels)?;
    let mut scratch = vec![0.0; obj.dim()];
    let initial_cost = obj.evaluate(init.flat(), &mut scratch);
    let (x, report) = match optimizer {
        Optimizer::Lbfgs(p) => lbfgs_minimize(&obj, init.flat(), budget, p)?,
        Optimizer::GradientDescent(p) => gd_minimize(&obj, init.flat(), budget, p)?,
    };
    // Recount degenerate samples at the returned point.
    obj.evaluate(&x, &mut scratch);
    let skipped_samples = obj.skipped();
    if skipped_samples > 0 {
        warn!("GLVQ skipped {skipped_samples} degenerate samples (d+ = d- = 0)");
    }
    let model = init.with_flat(x)?;
    Ok((
        model,
        GlvqFitReport {
            initial_cost,
            optimize: report,
            skipped_samples,
        },
    ))
}
