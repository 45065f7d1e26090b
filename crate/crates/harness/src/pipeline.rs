//! Model kinds and the encode-then-read-out pipeline.

use std::fmt;

use hdlvq_core::classifiers::{
    centroid_fit, glvq_fit, init_prototypes, one_hot, perceptron_refine, predict_nearest,
    rls_predict, GlvqFitReport, LinearReadout, Optimizer, PrototypeModel, RlsPath, RlsSystem,
};
use hdlvq_core::encoder::{ConventionalEncoder, EncoderSpec};
use hdlvq_core::optim::{GdParams, LbfgsParams};
use hdlvq_core::{seed, Error, Matrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    RlsRaw,
    GlvqRaw,
    RvflRls,
    RvflGlvq,
    IntrvflRls,
    IntrvflGlvq,
    IntrvflCentroid,
    IntrvflPerceptron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderKind {
    Identity,
    Conventional,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutKind {
    Rls,
    Glvq,
    Centroid,
    Perceptron,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::RlsRaw,
        ModelKind::GlvqRaw,
        ModelKind::RvflRls,
        ModelKind::RvflGlvq,
        ModelKind::IntrvflRls,
        ModelKind::IntrvflGlvq,
        ModelKind::IntrvflCentroid,
        ModelKind::IntrvflPerceptron,
    ];

    pub fn encoder(self) -> EncoderKind {
        match self {
            ModelKind::RlsRaw | ModelKind::GlvqRaw => EncoderKind::Identity,
            ModelKind::RvflRls | ModelKind::RvflGlvq => EncoderKind::Conventional,
            _ => EncoderKind::Integer,
        }
    }

    pub fn readout(self) -> ReadoutKind {
        match self {
            ModelKind::RlsRaw | ModelKind::RvflRls | ModelKind::IntrvflRls => ReadoutKind::Rls,
            ModelKind::GlvqRaw | ModelKind::RvflGlvq | ModelKind::IntrvflGlvq => ReadoutKind::Glvq,
            ModelKind::IntrvflCentroid => ReadoutKind::Centroid,
            ModelKind::IntrvflPerceptron => ReadoutKind::Perceptron,
        }
    }

    /// The ridge model sharing this kind's encoder, used to pick `N` (and
    /// `κ`) for the prototype readouts in two-phase runs.
    pub fn rls_sibling(self) -> Option<ModelKind> {
        match self {
            ModelKind::RvflGlvq => Some(ModelKind::RvflRls),
            ModelKind::IntrvflGlvq => Some(ModelKind::IntrvflRls),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RlsRaw => "rls-raw",
            ModelKind::GlvqRaw => "glvq-raw",
            ModelKind::RvflRls => "rvfl-rls",
            ModelKind::RvflGlvq => "rvfl-glvq",
            ModelKind::IntrvflRls => "intrvfl-rls",
            ModelKind::IntrvflGlvq => "intrvfl-glvq",
            ModelKind::IntrvflCentroid => "intrvfl-centroid",
            ModelKind::IntrvflPerceptron => "intrvfl-perceptron",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One point of the hyperparameter grid. Unused axes stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Hyper {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Lbfgs,
    Gd,
}

/// Everything about a fit that is not searched over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub budget: usize,
    pub optimizer: OptimizerKind,
    pub gd_step: f64,
    /// Strong-Wolfe constant for GLVQ line searches. The GLVQ cost is only
    /// piecewise smooth, so a loose test saves many evaluations.
    pub line_search_curvature: f64,
    pub init_noise: bool,
    pub rls_path: RlsPath,
    pub perceptron_alpha: f64,
    pub perceptron_epochs: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            budget: 2500,
            optimizer: OptimizerKind::Lbfgs,
            gd_step: GdParams::default().step,
            line_search_curvature: 0.9,
            init_noise: true,
            rls_path: RlsPath::Qr,
            perceptron_alpha: 0.05,
            perceptron_epochs: 20,
        }
    }
}

impl FitSettings {
    pub fn optimizer(&self) -> Optimizer {
        match self.optimizer {
            OptimizerKind::Lbfgs => {
                let mut p = LbfgsParams::default();
                p.line_search.curvature = Some(self.line_search_curvature);
                Optimizer::Lbfgs(p)
            }
            OptimizerKind::Gd => Optimizer::GradientDescent(GdParams::with_step(self.gd_step)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Encoder {
    Identity { k: usize },
    Conventional(ConventionalEncoder),
    Integer(EncoderSpec),
}

impl Encoder {
    pub fn build(
        kind: EncoderKind,
        k: usize,
        hyper: &Hyper,
        seed: u64,
    ) -> hdlvq_core::Result<Self> {
        let need_n = || {
            hyper
                .n
                .ok_or_else(|| Error::InvalidArgument("hidden dimension n is required".into()))
        };
        Ok(match kind {
            EncoderKind::Identity => Encoder::Identity { k },
            EncoderKind::Conventional => {
                Encoder::Conventional(ConventionalEncoder::new(k, need_n()?, seed)?)
            }
            EncoderKind::Integer => {
                let kappa = hyper
                    .kappa
                    .ok_or_else(|| Error::InvalidArgument("kappa is required".into()))?;
                Encoder::Integer(EncoderSpec::new(k, need_n()?, kappa, seed)?)
            }
        })
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Encoder::Identity { k } => *k,
            Encoder::Conventional(e) => e.n(),
            Encoder::Integer(e) => e.n(),
        }
    }

    pub fn encode(&self, x: &Matrix) -> hdlvq_core::Result<Matrix> {
        match self {
            Encoder::Identity { k } if *k == x.cols() => Ok(x.clone()),
            Encoder::Identity { k } => Err(Error::shapes("encode", x.shape(), (x.rows(), *k))),
            Encoder::Conventional(e) => e.encode_matrix(x),
            Encoder::Integer(e) => e.encode_matrix(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Readout {
    Linear(LinearReadout),
    Prototypes(PrototypeModel),
}

impl Readout {
    pub fn predict(&self, h: &[f64]) -> hdlvq_core::Result<usize> {
        match self {
            Readout::Linear(r) => rls_predict(r, h).map(|(c, _)| c),
            Readout::Prototypes(m) => predict_nearest(m, h).map(|(c, _)| c),
        }
    }

    pub fn predict_matrix(&self, h: &Matrix) -> hdlvq_core::Result<Vec<usize>> {
        h.iter_rows().map(|row| self.predict(row)).collect()
    }
}

/// Fits the readout for `kind` on already-encoded samples. `system` may carry
/// the cached normal equations of `h` for ridge readouts.
#[allow(clippy::too_many_arguments)]
pub fn fit_readout(
    kind: ReadoutKind,
    hyper: &Hyper,
    settings: &FitSettings,
    h: &Matrix,
    labels: &[usize],
    l: usize,
    noise_seed: u64,
    system: Option<&RlsSystem>,
) -> hdlvq_core::Result<(Readout, Option<GlvqFitReport>)> {
    match kind {
        ReadoutKind::Rls => {
            let lambda = hyper
                .lambda
                .ok_or_else(|| Error::InvalidArgument("lambda is required".into()))?;
            let owned;
            let system = match system {
                Some(s) => s,
                None => {
                    owned = RlsSystem::new(h, &one_hot(labels, l)?)?;
                    &owned
                }
            };
            Ok((
                Readout::Linear(system.solve(lambda, settings.rls_path)?),
                None,
            ))
        }
        ReadoutKind::Glvq => {
            let beta = hyper
                .beta
                .ok_or_else(|| Error::InvalidArgument("beta is required".into()))?;
            let p = hyper.p.unwrap_or(1);
            let mut rng = seed::rng(noise_seed);
            let noise = settings.init_noise.then_some(&mut rng);
            let init = init_prototypes(h, labels, l, p, beta, noise)?;
            let (model, report) =
                glvq_fit(h, labels, &init, settings.budget, &settings.optimizer())?;
            Ok((Readout::Prototypes(model), Some(report)))
        }
        ReadoutKind::Centroid => Ok((Readout::Prototypes(centroid_fit(h, labels, l)?), None)),
        ReadoutKind::Perceptron => {
            let init = centroid_fit(h, labels, l)?;
            let model = perceptron_refine(
                &init,
                h,
                labels,
                settings.perceptron_alpha,
                settings.perceptron_epochs,
            )?;
            Ok((Readout::Prototypes(model), None))
        }
    }
}

/// A trained model ready to classify normalized feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub n_classes: usize,
    pub encoder: Encoder,
    pub readout: Readout,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<GlvqFitReport>,
    /// Min-max ranges for raw inputs; empty when inputs arrive normalized.
    #[serde(default)]
    pub feature_ranges: Vec<(f64, f64)>,
    #[serde(default)]
    pub class_names: Vec<String>,
}

impl FittedPipeline {
    pub fn predict(&self, x: &Matrix) -> hdlvq_core::Result<Vec<usize>> {
        self.readout.predict_matrix(&self.encoder.encode(x)?)
    }

    pub fn accuracy(&self, x: &Matrix, labels: &[usize]) -> hdlvq_core::Result<f64> {
        Ok(accuracy(&self.predict(x)?, labels))
    }
}

/// Builds the encoder for `kind`, encodes the training rows and fits the
/// readout. Every class in `0..l` must occur in `labels`.
#[allow(clippy::too_many_arguments)]
pub fn fit_model(
    kind: ModelKind,
    hyper: &Hyper,
    settings: &FitSettings,
    x: &Matrix,
    labels: &[usize],
    l: usize,
    encoder_seed: u64,
    noise_seed: u64,
) -> hdlvq_core::Result<FittedPipeline> {
    if x.rows() == 0 || x.rows() != labels.len() {
        return Err(Error::lengths("fit_model", x.rows(), labels.len()));
    }
    let mut seen = vec![false; l];
    for &c in labels {
        if c >= l {
            return Err(Error::InvalidArgument(format!(
                "label {c} out of range for l={l}"
            )));
        }
        seen[c] = true;
    }
    if let Some(class) = seen.iter().position(|s| !s) {
        return Err(Error::EmptyClass { class });
    }
    let encoder = Encoder::build(kind.encoder(), x.cols(), hyper, encoder_seed)?;
    let h = encoder.encode(x)?;
    let (readout, report) = fit_readout(
        kind.readout(),
        hyper,
        settings,
        &h,
        labels,
        l,
        noise_seed,
        None,
    )?;
    Ok(FittedPipeline {
        kind,
        hyper: *hyper,
        n_classes: l,
        encoder,
        readout,
        report,
        feature_ranges: Vec::new(),
        class_names: Vec::new(),
    })
}

/// Fraction of positions where prediction equals label; 0 for empty input.
pub fn accuracy(pred: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(labels).filter(|(p, y)| p == y).count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Vec<usize>) {
        let x = Matrix::from_rows(&[
            [0.9, 0.1],
            [1.0, 0.0],
            [0.8, 0.2],
            [0.1, 0.9],
            [0.0, 0.8],
            [0.2, 1.0],
        ])
        .unwrap();
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    fn full_hyper() -> Hyper {
        Hyper {
            n: Some(64),
            kappa: Some(3),
            lambda: Some(0.1),
            beta: Some(2.0),
            p: Some(2),
        }
    }

    #[test]
    fn every_kind_separates_the_toy_set() {
        let (x, y) = toy();
        for kind in ModelKind::ALL {
            let m = fit_model(
                kind,
                &full_hyper(),
                &FitSettings::default(),
                &x,
                &y,
                2,
                1,
                2,
            )
            .unwrap();
            assert_eq!(m.accuracy(&x, &y).unwrap(), 1.0, "{kind}");
        }
    }

    #[test]
    fn missing_class_is_rejected() {
        let (x, _) = toy();
        let y = vec![0; 6];
        let err = fit_model(
            ModelKind::IntrvflRls,
            &full_hyper(),
            &FitSettings::default(),
            &x,
            &y,
            2,
            0,
            0,
        );
        assert_eq!(err.unwrap_err(), Error::EmptyClass { class: 1 });
    }

    #[test]
    fn pipeline_roundtrips_through_json() {
        let (x, y) = toy();
        let m = fit_model(
            ModelKind::IntrvflGlvq,
            &full_hyper(),
            &FitSettings::default(),
            &x,
            &y,
            2,
            5,
            6,
        )
        .unwrap();
        let back: FittedPipeline =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]), 0.75);
        assert_eq!(accuracy(&[], &[]), 0.0);
    }
}
