//! Hyperparameter grids and inner-split model selection.

use hdlvq_core::classifiers::{one_hot, RlsSystem};
use hdlvq_core::{seed, Matrix};
use log::warn;
use serde::{Deserialize, Serialize};

use crate::folds::holdout_split;
use crate::pipeline::{
    accuracy, fit_readout, Encoder, EncoderKind, FitSettings, Hyper, ModelKind, ReadoutKind,
};

/// Fraction of each training fold held out for model selection.
pub const INNER_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub kappa: Vec<u32>,
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: vec![50, 100, 250, 500, 1000, 1500],
            kappa: vec![1, 3, 7, 15],
            lambda: (-10..=5).map(|e| 2f64.powi(e)).collect(),
            beta: (1..=15).map(f64::from).collect(),
            p: (1..=5).collect(),
        }
    }
}

impl GridSpec {
    /// Grid points used by `kind`, ordered with `N` outermost, then `κ`,
    /// `λ`, `β` and `P`.
    pub fn points(&self, kind: ModelKind) -> Vec<Hyper> {
        fn axis<T: Copy>(use_it: bool, values: &[T]) -> Vec<Option<T>> {
            if use_it {
                values.iter().copied().map(Some).collect()
            } else {
                vec![None]
            }
        }
        let enc = kind.encoder();
        let readout = kind.readout();
        let mut out = Vec::new();
        for n in axis(enc != EncoderKind::Identity, &self.n) {
            for kappa in axis(enc == EncoderKind::Integer, &self.kappa) {
                for lambda in axis(readout == ReadoutKind::Rls, &self.lambda) {
                    for beta in axis(readout == ReadoutKind::Glvq, &self.beta) {
                        for p in axis(readout == ReadoutKind::Glvq, &self.p) {
                            out.push(Hyper {
                                n,
                                kappa,
                                lambda,
                                beta,
                                p,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Copy with the encoder axes pinned to one value each.
    pub fn with_encoder(&self, n: Option<usize>, kappa: Option<u32>) -> GridSpec {
        let mut g = self.clone();
        if let Some(n) = n {
            g.n = vec![n];
        }
        if let Some(k) = kappa {
            g.kappa = vec![k];
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointScore {
    pub hyper: Hyper,
    /// Inner-validation accuracy; `None` when the fit failed.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: Hyper,
    pub best_index: usize,
    pub inner_accuracy: f64,
    pub scores: Vec<GridPointScore>,
}

/// Seeds for one model-selection run.
#[derive(Debug, Clone, Copy)]
pub struct SearchSeeds {
    pub encoder: u64,
    pub noise: u64,
    pub split: u64,
}

/// Scores every grid point on a stratified holdout of `(x, labels)` and
/// returns the most accurate one. Ties go to the earliest point. Encoders
/// and ridge normal equations are shared by consecutive points.
pub fn grid_search(
    kind: ModelKind,
    grid: &GridSpec,
    settings: &FitSettings,
    x: &Matrix,
    labels: &[usize],
    l: usize,
    seeds: SearchSeeds,
) -> crate::Result<GridOutcome> {
    let points = grid.points(kind);
    if points.is_empty() {
        return Err(crate::HarnessError::Usage(format!("empty grid for {kind}")));
    }
    let (train_idx, val_idx) = holdout_split(labels, l, INNER_FRACTION, seeds.split);
    let x_train = x.select_rows(&train_idx);
    let x_val = x.select_rows(&val_idx);
    let y_train: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
    let y_val: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();

    let mut scores = Vec::with_capacity(points.len());
    let mut cache: Option<(
        (Option<usize>, Option<u32>),
        Matrix,
        Matrix,
        Option<RlsSystem>,
    )> = None;
    for (index, hyper) in points.iter().enumerate() {
        let key = (hyper.n, hyper.kappa);
        if cache.as_ref().is_none_or(|c| c.0 != key) {
            let encoder = Encoder::build(kind.encoder(), x.cols(), hyper, seeds.encoder)?;
            let h_train = encoder.encode(&x_train)?;
            let h_val = encoder.encode(&x_val)?;
            let system = match kind.readout() {
                ReadoutKind::Rls => Some(RlsSystem::new(&h_train, &one_hot(&y_train, l)?)?),
                _ => None,
            };
            cache = Some((key, h_train, h_val, system));
        }
        let (_, h_train, h_val, system) = cache.as_ref().expect("cache filled above");
        let noise = seed::derive(seeds.noise, &[index as u64]);
        let score = fit_readout(
            kind.readout(),
            hyper,
            settings,
            h_train,
            &y_train,
            l,
            noise,
            system.as_ref(),
        )
        .and_then(|(readout, _)| readout.predict_matrix(h_val))
        .map(|pred| accuracy(&pred, &y_val));
        let accuracy = match score {
            Ok(a) => Some(a),
            Err(e) => {
                warn!("{kind} grid point {index} ({hyper:?}) failed: {e}");
                None
            }
        };
        scores.push(GridPointScore {
            hyper: *hyper,
            accuracy,
        });
    }

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(a) = s.accuracy {
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((i, a));
            }
        }
    }
    let (best_index, inner_accuracy) = best.ok_or_else(|| {
        crate::HarnessError::Numerical(hdlvq_core::Error::InvalidArgument(format!(
            "every {kind} grid point failed"
        )))
    })?;
    Ok(GridOutcome {
        best: points[best_index],
        best_index,
        inner_accuracy,
        scores,
    })
}
