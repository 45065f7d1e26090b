//! Cross-validated, multi-seed experiments over a list of datasets.

use std::collections::HashMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use hdlvq_core::classifiers::GlvqFitReport;
use hdlvq_core::costmodel::{flops_glvq, flops_rls_direct, flops_rls_qr, CostInputs};
use hdlvq_core::seed::derive;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::{normalize, Dataset};
use crate::folds::{fold_indices, stratified_folds};
use crate::grid::{grid_search, GridSpec, SearchSeeds, INNER_FRACTION};
use crate::pipeline::{fit_model, FitSettings, Hyper, ModelKind, ReadoutKind};
use crate::{HarnessError, Result};

pub const SCHEMA: &str = "hdlvq.experiment/v1";

/// Keys whose values depend on the clock rather than on the inputs.
pub const TIMING_KEYS: [&str; 2] = ["wall_clock_ms", "timestamp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub grid: GridSpec,
    pub settings: FitSettings,
    pub folds: usize,
    pub seeds: usize,
    pub master_seed: u64,
    /// Prototype readouts take `N` and `κ` from the matching ridge model.
    pub two_phase: bool,
    /// Worker threads; `None` uses every core. Not part of the output.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::IntrvflGlvq,
            grid: GridSpec::default(),
            settings: FitSettings::default(),
            folds: 4,
            seeds: 5,
            master_seed: 0,
            two_phase: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub outer: String,
    pub folds: usize,
    pub fold_assignment: String,
    pub inner: String,
    pub inner_fraction: f64,
    pub model_selection: String,
    pub normalization: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub encoder_selection: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

/// Analytic training cost of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flops {
    pub inputs: CostInputs,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rls_direct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rls_qr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub glvq: Option<f64>,
}

impl Flops {
    pub fn for_readout(readout: ReadoutKind, inputs: CostInputs) -> Self {
        let (rls_direct, rls_qr, glvq) = match readout {
            ReadoutKind::Rls => (
                Some(flops_rls_direct(&inputs)),
                Some(flops_rls_qr(&inputs)),
                None,
            ),
            ReadoutKind::Glvq => (None, None, Some(flops_glvq(&inputs))),
            ReadoutKind::Centroid | ReadoutKind::Perceptron => (None, None, None),
        };
        Self {
            inputs,
            rls_direct,
            rls_qr,
            glvq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub hyper: Hyper,
    pub inner_accuracy: f64,
    pub accuracy: f64,
    pub flops: Flops,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub optimizer: Option<GlvqFitReport>,
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub index: usize,
    pub encoder_seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub name: String,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub seeds: Vec<SeedResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_accuracy: Option<f64>,
    pub wall_clock_ms: f64,
}

impl DatasetResult {
    pub fn failed(name: &str, error: String) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            features: 0,
            classes: 0,
            error: Some(error),
            seeds: Vec::new(),
            mean_accuracy: None,
            wall_clock_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: String,
    pub config: ExperimentConfig,
    pub protocol: Protocol,
    pub environment: Environment,
    pub datasets: Vec<DatasetResult>,
    /// Mean over datasets that completed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_accuracy: Option<f64>,
    pub wall_clock_ms: f64,
    pub timestamp: u64,
}

impl ExperimentResult {
    /// Completed datasets with their mean accuracy.
    pub fn dataset_means(&self) -> Vec<(&str, f64)> {
        self.datasets
            .iter()
            .filter_map(|d| d.mean_accuracy.map(|m| (d.name.as_str(), m)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Recursively removes [`TIMING_KEYS`] so two documents can be compared.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for key in TIMING_KEYS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Stable 64-bit id of a dataset name, so seeds do not depend on list order.
fn dataset_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

const STREAM_FOLDS: u64 = 0;
const STREAM_ENCODER: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SPLIT: u64 = 3;
const REFIT: u64 = u64::MAX;

/// `(N, κ)` chosen per (dataset, seed, fold) by an earlier ridge run.
type EncoderChoices = HashMap<(String, usize, usize), (Option<usize>, Option<u32>)>;

fn encoder_choices(cfg: &ExperimentConfig, phase1: &ExperimentResult) -> Result<EncoderChoices> {
    let p = &phase1.config;
    if Some(p.model) != cfg.model.rls_sibling() {
        return Err(HarnessError::Usage(format!(
            "encoder source was produced by {}, expected {}",
            p.model,
            cfg.model
                .rls_sibling()
                .map_or("a ridge model", ModelKind::name)
        )));
    }
    if p.folds != cfg.folds || p.seeds != cfg.seeds || p.master_seed != cfg.master_seed {
        return Err(HarnessError::Usage(
            "encoder source uses different folds, seeds or master seed".into(),
        ));
    }
    let mut map = HashMap::new();
    for d in &phase1.datasets {
        for s in &d.seeds {
            for f in &s.folds {
                map.insert(
                    (d.name.clone(), s.index, f.fold),
                    (f.hyper.n, f.hyper.kappa),
                );
            }
        }
    }
    Ok(map)
}

/// Runs the experiment. In two-phase mode the ridge sibling is run first
/// to choose the encoder for prototype readouts.
pub fn run_experiment(cfg: &ExperimentConfig, datasets: &[Dataset]) -> Result<ExperimentResult> {
    match cfg.model.rls_sibling() {
        Some(sibling) if cfg.two_phase => {
            info!("phase 1: {sibling} selects the encoder for {}", cfg.model);
            let phase1_cfg = ExperimentConfig {
                model: sibling,
                ..cfg.clone()
            };
            let phase1 = run_experiment_with(&phase1_cfg, datasets, None)?;
            run_experiment_with(cfg, datasets, Some(&phase1))
        }
        _ => run_experiment_with(cfg, datasets, None),
    }
}

/// Runs the experiment, taking `N` and `κ` from `phase1` when given.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    datasets: &[Dataset],
    phase1: Option<&ExperimentResult>,
) -> Result<ExperimentResult> {
    if cfg.seeds == 0 {
        return Err(HarnessError::Usage("need at least one seed".into()));
    }
    if cfg.grid.points(cfg.model).is_empty() {
        return Err(HarnessError::Usage(format!("empty grid for {}", cfg.model)));
    }
    let choices = phase1.map(|p| encoder_choices(cfg, p)).transpose()?;
    let start = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;

    let prepared: Vec<std::result::Result<(Dataset, Vec<usize>), String>> = datasets
        .iter()
        .map(|ds| {
            if ds.is_empty() {
                return Err("dataset has no samples".to_string());
            }
            let assignment = fold_assignment(cfg, ds).map_err(|e| e.to_string())?;
            Ok((normalize(ds), assignment))
        })
        .collect();

    let mut units = Vec::new();
    for (d, prep) in prepared.iter().enumerate() {
        if prep.is_ok() {
            for s in 0..cfg.seeds {
                for f in 0..cfg.folds {
                    units.push((d, s, f));
                }
            }
        }
    }

    let outcomes: Vec<Result<FoldResult>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(d, s, f)| {
                let (ds, assignment) = prepared[d]
                    .as_ref()
                    .expect("units only cover prepared datasets");
                let pinned = match &choices {
                    Some(map) => Some(*map.get(&(ds.name.clone(), s, f)).ok_or_else(|| {
                        HarnessError::Usage(format!(
                            "encoder source lacks {} seed {s} fold {f}",
                            ds.name
                        ))
                    })?),
                    None => None,
                };
                run_unit(cfg, ds, assignment, s, f, pinned)
            })
            .collect()
    });

    let mut outcomes = outcomes.into_iter();
    let mut results = Vec::with_capacity(datasets.len());
    for (ds, prep) in datasets.iter().zip(&prepared) {
        let (normalized, _) = match prep {
            Ok(p) => p,
            Err(e) => {
                warn!("{}: {e}", ds.name);
                results.push(DatasetResult::failed(&ds.name, e.clone()));
                continue;
            }
        };
        let mut seeds = Vec::with_capacity(cfg.seeds);
        let mut error = None;
        for s in 0..cfg.seeds {
            let mut folds = Vec::with_capacity(cfg.folds);
            for _ in 0..cfg.folds {
                match outcomes.next().expect("one outcome per unit") {
                    Ok(r) => folds.push(r),
                    Err(e) => {
                        error.get_or_insert_with(|| e.to_string());
                    }
                }
            }
            let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
            seeds.push(SeedResult {
                index: s,
                encoder_seed: encoder_seed(cfg, &ds.name, s),
                mean_accuracy: mean(&accs),
                folds,
            });
        }
        if let Some(e) = &error {
            warn!("{}: {e}", ds.name);
        }
        let wall: f64 = seeds
            .iter()
            .flat_map(|s| s.folds.iter().map(|f| f.wall_clock_ms))
            .sum();
        let seed_means: Vec<f64> = seeds.iter().map(|s| s.mean_accuracy).collect();
        results.push(DatasetResult {
            name: ds.name.clone(),
            samples: normalized.len(),
            features: normalized.n_features(),
            classes: normalized.n_classes(),
            mean_accuracy: error.is_none().then(|| mean(&seed_means)),
            error,
            seeds,
            wall_clock_ms: wall,
        });
    }

    let done: Vec<f64> = results.iter().filter_map(|d| d.mean_accuracy).collect();
    Ok(ExperimentResult {
        schema: SCHEMA.into(),
        config: cfg.clone(),
        protocol: protocol(cfg, phase1.map(|p| p.config.model)),
        environment: Environment::current(),
        mean_accuracy: (!done.is_empty()).then(|| mean(&done)),
        datasets: results,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    })
}

fn protocol(cfg: &ExperimentConfig, encoder_source: Option<ModelKind>) -> Protocol {
    Protocol {
        outer: "stratified k-fold".into(),
        folds: cfg.folds,
        fold_assignment: "per-class shuffle dealt round-robin; one assignment per dataset, shared by all seeds".into(),
        inner: "stratified holdout of each training fold".into(),
        inner_fraction: INNER_FRACTION,
        model_selection: "highest holdout accuracy; ties go to the earliest grid point (N, kappa, lambda, beta, P)"
            .into(),
        normalization: "min-max over the whole dataset before splitting, so test rows contribute to the ranges"
            .into(),
        encoder_selection: encoder_source.map(|m| format!("N and kappa per fold from {m}")),
    }
}

/// Outer fold of every sample of `ds`; the same for all seeds.
pub fn fold_assignment(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<usize>> {
    let seed = derive(cfg.master_seed, &[dataset_id(&ds.name), STREAM_FOLDS]);
    stratified_folds(&ds.labels, ds.n_classes(), cfg.folds, seed)
}

fn encoder_seed(cfg: &ExperimentConfig, name: &str, s: usize) -> u64 {
    derive(
        cfg.master_seed,
        &[dataset_id(name), STREAM_ENCODER, s as u64],
    )
}

fn run_unit(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    assignment: &[usize],
    s: usize,
    f: usize,
    pinned: Option<(Option<usize>, Option<u32>)>,
) -> Result<FoldResult> {
    let start = Instant::now();
    let id = dataset_id(&ds.name);
    let l = ds.n_classes();
    let (train, test) = fold_indices(assignment, f);
    let x_train = ds.features.select_rows(&train);
    let x_test = ds.features.select_rows(&test);
    let y_train: Vec<usize> = train.iter().map(|&i| ds.labels[i]).collect();
    let y_test: Vec<usize> = test.iter().map(|&i| ds.labels[i]).collect();

    let seeds = SearchSeeds {
        encoder: encoder_seed(cfg, &ds.name, s),
        noise: derive(cfg.master_seed, &[id, STREAM_NOISE, s as u64, f as u64]),
        split: derive(cfg.master_seed, &[id, STREAM_SPLIT, f as u64]),
    };
    let grid = match pinned {
        Some((n, kappa)) => cfg.grid.with_encoder(n, kappa),
        None => cfg.grid.clone(),
    };
    let outcome = grid_search(
        cfg.model,
        &grid,
        &cfg.settings,
        &x_train,
        &y_train,
        l,
        seeds,
    )?;
    let model = fit_model(
        cfg.model,
        &outcome.best,
        &cfg.settings,
        &x_train,
        &y_train,
        l,
        seeds.encoder,
        derive(seeds.noise, &[REFIT]),
    )?;
    let accuracy = model.accuracy(&x_test, &y_test)?;
    let inputs = CostInputs::new(
        train.len(),
        model.encoder.output_dim(),
        l,
        outcome.best.p.unwrap_or(1),
        model.report.as_ref().map_or(0, |r| r.optimize.iterations),
    );
    Ok(FoldResult {
        fold: f,
        train_size: train.len(),
        test_size: test.len(),
        hyper: outcome.best,
        inner_accuracy: outcome.inner_accuracy,
        accuracy,
        flops: Flops::for_readout(cfg.model.readout(), inputs),
        optimizer: model.report,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
