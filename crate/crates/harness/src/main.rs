use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdlvq_core::classifiers::RlsPath;
use hdlvq_core::costmodel::{
    flops_glvq, flops_rls_direct, flops_rls_qr, relative_cost, CostInputs,
};
use hdlvq_core::seed::derive;
use hdlvq_harness::dataset::{
    apply_ranges, load_dataset, normalize, Dataset, LabelPosition, LoadOptions,
};
use hdlvq_harness::experiment::{
    run_experiment, run_experiment_with, DatasetResult, ExperimentConfig, ExperimentResult,
};
use hdlvq_harness::grid::{grid_search, GridSpec, SearchSeeds};
use hdlvq_harness::pipeline::{fit_model, FitSettings, FittedPipeline, ModelKind, OptimizerKind};
use hdlvq_harness::report::compare_report;
use hdlvq_harness::{HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hdlvq",
    version,
    about = "Integer RVFL networks with GLVQ, ridge and centroid readouts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select hyperparameters on one dataset and fit a model on all of it.
    Fit(FitArgs),
    /// Score a fitted model on a labelled file.
    Eval(EvalArgs),
    /// Print the holdout score of every grid point.
    Grid(FitArgs),
    /// Cross-validated multi-seed experiment over several datasets.
    Bench(BenchArgs),
    /// Compare two bench results dataset by dataset.
    Compare(CompareArgs),
    /// Analytic training flops for given sizes.
    Cost(CostArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    #[arg(long, value_enum, default_value_t = LabelPosition::Last)]
    label_position: LabelPosition,
    /// The first line holds column names.
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            label_position: self.label_position,
            header: self.header,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::IntrvflGlvq)]
    model: ModelKind,
    /// Optimizer iteration cap for GLVQ.
    #[arg(long, default_value_t = 2500)]
    budget: usize,
    /// Comma-separated values, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    beta_grid: Option<Vec<f64>>,
    /// Comma-separated values; `2^k` is accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    kappa_grid: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Lbfgs)]
    optimizer: OptimizerKind,
    /// Step size of plain gradient descent.
    #[arg(long, default_value_t = 0.01)]
    gd_step: f64,
    /// Start GLVQ from exact class centroids.
    #[arg(long)]
    no_init_noise: bool,
    #[arg(long, value_parser = parse_rls_path, default_value = "qr")]
    rls_path: RlsPath,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn grid(&self) -> GridSpec {
        let d = GridSpec::default();
        GridSpec {
            n: self.n_grid.clone().unwrap_or(d.n),
            kappa: self.kappa_grid.clone().unwrap_or(d.kappa),
            lambda: self.lambda_grid.clone().unwrap_or(d.lambda),
            beta: self.beta_grid.clone().unwrap_or(d.beta),
            p: self.p_grid.clone().unwrap_or(d.p),
        }
    }

    fn settings(&self) -> FitSettings {
        FitSettings {
            budget: self.budget,
            optimizer: self.optimizer,
            gd_step: self.gd_step,
            init_noise: !self.no_init_noise,
            rls_path: self.rls_path,
            ..FitSettings::default()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model written by `fit`.
    #[arg(long)]
    pipeline: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset file; repeatable.
    #[arg(long)]
    dataset: Vec<PathBuf>,
    /// Every `*.csv` in this directory, in name order.
    #[arg(long)]
    dataset_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// Search N and kappa for GLVQ readouts directly instead of reusing the
    /// ridge model's choice.
    #[arg(long)]
    single_phase: bool,
    /// Earlier ridge bench result supplying N and kappa per fold.
    #[arg(long)]
    encoder_from: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scatter-ready CSV of per-dataset accuracy pairs.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Training samples.
    #[arg(long)]
    t: usize,
    /// Hidden dimension.
    #[arg(long)]
    n: usize,
    /// Classes.
    #[arg(long)]
    l: usize,
    /// Prototypes per class.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Optimizer iterations.
    #[arg(long, default_value_t = 10)]
    i: usize,
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((base, exp)) => {
            let b: f64 = base.parse().map_err(|_| format!("bad base in {s:?}"))?;
            let e: i32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            b.powi(e)
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_rls_path(s: &str) -> std::result::Result<RlsPath, String> {
    match s {
        "qr" => Ok(RlsPath::Qr),
        "direct" => Ok(RlsPath::Direct),
        _ => Err(format!("expected qr or direct, got {s:?}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_result(path: &Path) -> Result<ExperimentResult> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::data(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::data(path.display().to_string(), e.to_string()))
}

fn select(args: &FitArgs) -> Result<(Dataset, hdlvq_harness::grid::GridOutcome, SearchSeeds)> {
    let ds = normalize(&load_dataset(&args.dataset, args.data.options())?);
    let m = &args.model;
    let seeds = SearchSeeds {
        encoder: derive(m.seed, &[1]),
        noise: derive(m.seed, &[2]),
        split: derive(m.seed, &[3]),
    };
    let outcome = grid_search(
        m.model,
        &m.grid(),
        &m.settings(),
        &ds.features,
        &ds.labels,
        ds.n_classes(),
        seeds,
    )?;
    Ok((ds, outcome, seeds))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (ds, outcome, seeds) = select(args)?;
    let m = &args.model;
    let mut pipeline = fit_model(
        m.model,
        &outcome.best,
        &m.settings(),
        &ds.features,
        &ds.labels,
        ds.n_classes(),
        seeds.encoder,
        derive(seeds.noise, &[u64::MAX]),
    )?;
    pipeline.feature_ranges = ds.feature_ranges.clone();
    pipeline.class_names = ds.class_names.clone();
    eprintln!(
        "{}: {} on {} samples, holdout accuracy {:.4}, training accuracy {:.4}",
        ds.name,
        m.model,
        ds.len(),
        outcome.inner_accuracy,
        pipeline.accuracy(&ds.features, &ds.labels)?
    );
    emit(
        args.out.as_deref(),
        &serde_json::to_string_pretty(&pipeline)?,
    )
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.pipeline)?;
    let pipeline: FittedPipeline = serde_json::from_str(&text)
        .map_err(|e| HarnessError::data(args.pipeline.display().to_string(), e.to_string()))?;
    let ds = load_dataset(&args.dataset, args.data.options())?;
    // Map this file's label text onto the training classes.
    let labels = ds
        .labels
        .iter()
        .map(|&c| {
            let name = &ds.class_names[c];
            pipeline
                .class_names
                .iter()
                .position(|k| k == name)
                .ok_or_else(|| {
                    HarnessError::data(
                        args.dataset.display().to_string(),
                        format!("unknown class {name:?}"),
                    )
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let x = apply_ranges(&ds.features, &pipeline.feature_ranges);
    let accuracy = pipeline.accuracy(&x, &labels)?;
    let doc = json!({ "dataset": ds.name, "model": pipeline.kind, "samples": ds.len(), "accuracy": accuracy });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&doc)?)
}

fn cmd_grid(args: &FitArgs) -> Result<()> {
    let (_, outcome, _) = select(args)?;
    emit(
        args.out.as_deref(),
        &serde_json::to_string_pretty(&outcome)?,
    )
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let mut paths = args.dataset.clone();
    if let Some(dir) = &args.dataset_dir {
        let mut found: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| HarnessError::data(dir.display().to_string(), e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        found.sort();
        paths.extend(found);
    }
    if paths.is_empty() {
        return Err(HarnessError::Usage(
            "give --dataset or --dataset-dir".into(),
        ));
    }
    let mut datasets = Vec::new();
    let mut failed = Vec::new();
    for p in &paths {
        match load_dataset(p, args.data.options()) {
            Ok(ds) => datasets.push(ds),
            Err(e) => {
                log::warn!("{e}");
                let name = p.file_stem().map_or_else(
                    || p.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                );
                failed.push(DatasetResult::failed(&name, e.to_string()));
            }
        }
    }
    let m = &args.model;
    let cfg = ExperimentConfig {
        model: m.model,
        grid: m.grid(),
        settings: m.settings(),
        folds: args.folds,
        seeds: args.seeds,
        master_seed: m.seed,
        two_phase: !args.single_phase,
        threads: args.threads,
    };
    let mut result = match &args.encoder_from {
        Some(path) => run_experiment_with(&cfg, &datasets, Some(&read_result(path)?))?,
        None => run_experiment(&cfg, &datasets)?,
    };
    result.datasets.extend(failed);
    for d in &result.datasets {
        match (d.mean_accuracy, &d.error) {
            (Some(a), _) => eprintln!("{:<20} {:.4}", d.name, a),
            (None, Some(e)) => eprintln!("{:<20} failed: {e}", d.name),
            (None, None) => {}
        }
    }
    emit(args.out.as_deref(), &result.to_json()?)
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cmp = compare_report(&read_result(&args.a)?, &read_result(&args.b)?)?;
    if let Some(p) = &args.csv {
        fs::write(p, cmp.scatter_csv()?)?;
    }
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&cmp)?)
}

fn cmd_cost(args: &CostArgs) -> Result<()> {
    let c = CostInputs::new(args.t, args.n, args.l, args.p, args.i);
    let r = relative_cost(&c);
    println!("T={} N={} L={} P={} I={}", c.t, c.n, c.l, c.p, c.i);
    println!("{:<12} {:>18} {:>10}", "procedure", "flops", "ratio");
    println!(
        "{:<12} {:>18.1} {:>10.4}",
        "rls-direct",
        flops_rls_direct(&c),
        1.0
    );
    println!(
        "{:<12} {:>18.1} {:>10.4}",
        "rls-qr",
        flops_rls_qr(&c),
        r.qr_ratio
    );
    println!(
        "{:<12} {:>18.1} {:>10.4}",
        "glvq",
        flops_glvq(&c),
        r.glvq_ratio
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Cost(a) => cmd_cost(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
