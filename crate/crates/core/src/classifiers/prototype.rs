use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{argmin, sq_dist};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::seed::Rng;

#[derive(Deserialize)]
struct PrototypeDoc {
    l: usize,
    p: usize,
    n: usize,
    prototypes: Vec<f64>,
    class_of: Vec<usize>,
    beta: f64,
}

/// `L * P` prototypes of length `N`, each labelled with a class.
///
/// Prototypes are stored row-major; prototype `j` occupies
/// `prototypes[j * n..(j + 1) * n]` and belongs to class `class_of[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PrototypeDoc")]
pub struct PrototypeModel {
    l: usize,
    p: usize,
    n: usize,
    prototypes: Vec<f64>,
    class_of: Vec<usize>,
    beta: f64,
}

impl TryFrom<PrototypeDoc> for PrototypeModel {
    type Error = Error;

    fn try_from(d: PrototypeDoc) -> Result<Self> {
        Self::with_class_map(d.l, d.p, d.n, d.prototypes, d.class_of, d.beta)
    }
}

impl PrototypeModel {
    /// Class-major layout: prototypes `i * p .. (i + 1) * p` belong to class `i`.
    pub fn new(l: usize, p: usize, n: usize, prototypes: Vec<f64>, beta: f64) -> Result<Self> {
        let class_of = (0..l * p).map(|j| j / p.max(1)).collect();
        Self::with_class_map(l, p, n, prototypes, class_of, beta)
    }

    pub fn with_class_map(
        l: usize,
        p: usize,
        n: usize,
        prototypes: Vec<f64>,
        class_of: Vec<usize>,
        beta: f64,
    ) -> Result<Self> {
        if l == 0 || p == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "prototype model needs l, p, n >= 1, got l={l}, p={p}, n={n}"
            )));
        }
        if prototypes.len() != l * p * n {
            return Err(Error::lengths(
                "PrototypeModel",
                l * p * n,
                prototypes.len(),
            ));
        }
        if class_of.len() != l * p {
            return Err(Error::lengths(
                "PrototypeModel class map",
                l * p,
                class_of.len(),
            ));
        }
        let mut counts = vec![0usize; l];
        for &c in &class_of {
            if c >= l {
                return Err(Error::InvalidArgument(format!(
                    "class {c} out of range for l={l}"
                )));
            }
            counts[c] += 1;
        }
        if let Some(c) = counts.iter().position(|&k| k != p) {
            return Err(Error::InvalidArgument(format!(
                "class {c} has {} prototypes, expected {p}",
                counts[c]
            )));
        }
        if let Some(index) = prototypes.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        Ok(Self {
            l,
            p,
            n,
            prototypes,
            class_of,
            beta,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn prototype(&self, j: usize) -> &[f64] {
        &self.prototypes[j * self.n..(j + 1) * self.n]
    }

    pub fn prototype_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.prototypes[j * self.n..(j + 1) * self.n]
    }

    pub fn flat(&self) -> &[f64] {
        &self.prototypes
    }

    /// Same labels and slope with new prototype coordinates.
    pub fn with_flat(&self, prototypes: Vec<f64>) -> Result<Self> {
        Self::with_class_map(
            self.l,
            self.p,
            self.n,
            prototypes,
            self.class_of.clone(),
            self.beta,
        )
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn distances(&self, h: &[f64]) -> Vec<f64> {
        self.prototypes
            .chunks_exact(self.n)
            .map(|w| sq_dist(h, w))
            .collect()
    }

    pub fn predict(&self, h: &[f64]) -> Result<usize> {
        predict_nearest(self, h).map(|(c, _)| c)
    }
}

/// Class of the nearest prototype and the distances to all prototypes.
/// Ties go to the lowest prototype index.
pub fn predict_nearest(model: &PrototypeModel, h: &[f64]) -> Result<(usize, Vec<f64>)> {
    if h.len() != model.n {
        return Err(Error::lengths("predict_nearest", model.n, h.len()));
    }
    let d = model.distances(h);
    Ok((model.class_of[argmin(&d)], d))
}

fn class_means(samples: &Matrix, labels: &[usize], l: usize) -> Result<Vec<Vec<f64>>> {
    if labels.len() != samples.rows() {
        return Err(Error::lengths("class labels", samples.rows(), labels.len()));
    }
    let n = samples.cols();
    let mut sums = vec![vec![0.0; n]; l];
    let mut counts = vec![0usize; l];
    for (row, &c) in samples.iter_rows().zip(labels) {
        if c >= l {
            return Err(Error::InvalidArgument(format!(
                "label {c} out of range for l={l}"
            )));
        }
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    if let Some(class) = counts.iter().position(|&k| k == 0) {
        return Err(Error::EmptyClass { class });
    }
    for (s, &k) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= k as f64);
    }
    Ok(sums)
}

/// One prototype per class at the class mean.
pub fn centroid_fit(samples: &Matrix, labels: &[usize], l: usize) -> Result<PrototypeModel> {
    init_prototypes(samples, labels, l, 1, 1.0, None)
}

/// Every class gets `p` copies of its centroid, optionally perturbed by
/// independent uniform noise on `(-1, 1)` drawn from `noise`.
pub fn init_prototypes(
    samples: &Matrix,
    labels: &[usize],
    l: usize,
    p: usize,
    beta: f64,
    noise: Option<&mut Rng>,
) -> Result<PrototypeModel> {
    let means = class_means(samples, labels, l)?;
    let n = samples.cols();
    let mut flat = Vec::with_capacity(l * p * n);
    for mean in &means {
        for _ in 0..p {
            flat.extend_from_slice(mean);
        }
    }
    if let Some(rng) = noise {
        for v in &mut flat {
            *v += rng.gen_range(-1.0..1.0);
        }
    }
    PrototypeModel::new(l, p, n, flat, beta)
}
