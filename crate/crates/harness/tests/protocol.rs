mod common;

use common::blobs;
use hdlvq_core::costmodel::{flops_glvq, flops_rls_direct, flops_rls_qr};
use hdlvq_harness::dataset::Dataset;
use hdlvq_harness::experiment::{
    fold_assignment, run_experiment, strip_timing, ExperimentConfig, ExperimentResult,
};
use hdlvq_harness::folds::fold_indices;
use hdlvq_harness::grid::GridSpec;
use hdlvq_harness::pipeline::{fit_model, FitSettings, ModelKind};

fn small_grid() -> GridSpec {
    GridSpec {
        n: vec![50, 100],
        kappa: vec![3],
        lambda: vec![0.01, 1.0],
        beta: vec![2.0, 6.0],
        p: vec![1, 2],
    }
}

fn config(model: ModelKind, budget: usize) -> ExperimentConfig {
    ExperimentConfig {
        model,
        grid: small_grid(),
        settings: FitSettings {
            budget,
            ..FitSettings::default()
        },
        folds: 4,
        seeds: 2,
        master_seed: 11,
        two_phase: true,
        threads: Some(1),
    }
}

fn folds_of(r: &ExperimentResult) -> impl Iterator<Item = &hdlvq_harness::experiment::FoldResult> {
    r.datasets
        .iter()
        .flat_map(|d| &d.seeds)
        .flat_map(|s| &s.folds)
}

fn sets() -> Vec<Dataset> {
    vec![blobs("alpha", 15, 3, 3, 1), blobs("beta", 12, 5, 2, 2)]
}

#[test]
fn thread_count_does_not_change_results() {
    let data = sets();
    let mut cfg = config(ModelKind::IntrvflGlvq, 30);
    let a = run_experiment(&cfg, &data).unwrap();
    cfg.threads = Some(3);
    let b = run_experiment(&cfg, &data).unwrap();
    let mut va = serde_json::to_value(&a).unwrap();
    let mut vb = serde_json::to_value(&b).unwrap();
    strip_timing(&mut va);
    strip_timing(&mut vb);
    assert_eq!(
        serde_json::to_string(&va).unwrap(),
        serde_json::to_string(&vb).unwrap()
    );
}

#[test]
fn seeds_draw_distinct_encoders() {
    let r = run_experiment(&config(ModelKind::IntrvflRls, 0), &sets()).unwrap();
    for d in &r.datasets {
        assert_eq!(d.seeds.len(), 2);
        assert_ne!(d.seeds[0].encoder_seed, d.seeds[1].encoder_seed);
        let means: Vec<f64> = d.seeds.iter().map(|s| s.mean_accuracy).collect();
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        assert!((d.mean_accuracy.unwrap() - mean).abs() < 1e-15);
        for s in &d.seeds {
            let folds: Vec<f64> = s.folds.iter().map(|f| f.accuracy).collect();
            assert!((s.mean_accuracy - folds.iter().sum::<f64>() / 4.0).abs() < 1e-15);
            assert!(folds.iter().all(|a| (0.0..=1.0).contains(a)));
        }
    }
}

#[test]
fn folds_partition_every_dataset() {
    let cfg = config(ModelKind::IntrvflRls, 0);
    for ds in sets() {
        let assignment = fold_assignment(&cfg, &ds).unwrap();
        let mut seen = vec![0; ds.len()];
        for f in 0..cfg.folds {
            let (train, test) = fold_indices(&assignment, f);
            assert_eq!(train.len() + test.len(), ds.len());
            test.iter().for_each(|&i| seen[i] += 1);
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}

#[test]
fn small_budget_reaches_every_fit() {
    let r = run_experiment(&config(ModelKind::IntrvflGlvq, 10), &sets()).unwrap();
    let mut count = 0;
    for f in folds_of(&r) {
        let report = f.optimizer.as_ref().expect("glvq folds carry a report");
        assert!(report.optimize.iterations <= 10);
        assert_eq!(f.flops.inputs.i, report.optimize.iterations);
        assert_eq!(f.flops.glvq, Some(flops_glvq(&f.flops.inputs)));
        assert!(f.flops.rls_direct.is_none() && f.flops.rls_qr.is_none());
        count += 1;
    }
    assert_eq!(count, 2 * 2 * 4);
}

#[test]
fn ridge_folds_report_both_solver_costs() {
    let r = run_experiment(&config(ModelKind::IntrvflRls, 0), &sets()).unwrap();
    for d in &r.datasets {
        for f in d.seeds.iter().flat_map(|s| &s.folds) {
            let c = &f.flops.inputs;
            assert_eq!(c.t, f.train_size);
            assert_eq!(Some(c.n), f.hyper.n);
            assert_eq!(c.l, d.classes);
            assert_eq!(f.flops.rls_direct, Some(flops_rls_direct(c)));
            assert_eq!(f.flops.rls_qr, Some(flops_rls_qr(c)));
            assert!(f.optimizer.is_none());
        }
    }
}

#[test]
fn two_phase_reuses_ridge_encoder_choice() {
    let data = sets();
    let rls = run_experiment(&config(ModelKind::IntrvflRls, 0), &data).unwrap();
    let glvq = run_experiment(&config(ModelKind::IntrvflGlvq, 20), &data).unwrap();
    for (a, b) in folds_of(&rls).zip(folds_of(&glvq)) {
        assert_eq!((a.hyper.n, a.hyper.kappa), (b.hyper.n, b.hyper.kappa));
    }
    assert!(glvq.protocol.encoder_selection.is_some());
}

/// Index of a sample in `fold` that is neither the minimum nor the maximum
/// of any feature, so moving it inside the ranges leaves normalization alone.
fn interior_sample(ds: &Dataset, assignment: &[usize], fold: usize) -> usize {
    let k = ds.n_features();
    let (lo, hi): (Vec<f64>, Vec<f64>) = (0..k)
        .map(|j| {
            let col = (0..ds.len()).map(|i| ds.features.get(i, j));
            (
                col.clone().fold(f64::INFINITY, f64::min),
                col.fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .unzip();
    (0..ds.len())
        .find(|&i| {
            assignment[i] == fold
                && (0..k).all(|j| {
                    let v = ds.features.get(i, j);
                    v > lo[j] && v < hi[j]
                })
        })
        .expect("an interior test sample")
}

fn perturbed(ds: &Dataset, i: usize) -> Dataset {
    let mut out = ds.clone();
    for j in 0..ds.n_features() {
        let col: Vec<f64> = (0..ds.len()).map(|r| ds.features.get(r, j)).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        let shift = if ds.features.get(i, j) < mid {
            0.25
        } else {
            -0.25
        };
        out.features.set(i, j, mid + shift * (hi - lo));
        assert!(out.features.get(i, j) < hi && out.features.get(i, j) > lo);
    }
    out
}

#[test]
fn test_fold_sentinel_never_reaches_a_fit() {
    for model in [
        ModelKind::IntrvflGlvq,
        ModelKind::IntrvflRls,
        ModelKind::RvflRls,
    ] {
        let cfg = config(model, 25);
        let ds = blobs("sentinel", 16, 4, 3, 9);
        let assignment = fold_assignment(&cfg, &ds).unwrap();
        let fold = 1;
        let i = interior_sample(&ds, &assignment, fold);
        let moved = perturbed(&ds, i);
        let a = run_experiment(&cfg, std::slice::from_ref(&ds)).unwrap();
        let b = run_experiment(&cfg, std::slice::from_ref(&moved)).unwrap();
        for (sa, sb) in a.datasets[0].seeds.iter().zip(&b.datasets[0].seeds) {
            let (fa, fb) = (&sa.folds[fold], &sb.folds[fold]);
            assert_eq!(fa.hyper, fb.hyper, "{model}");
            assert_eq!(fa.inner_accuracy.to_bits(), fb.inner_accuracy.to_bits());
            assert_eq!(fa.optimizer, fb.optimizer);
            assert_eq!(fa.flops, fb.flops);
        }

        // The refit model itself is bit-identical.
        let (train, _) = fold_indices(&assignment, fold);
        let norm = |d: &Dataset| hdlvq_harness::dataset::normalize(d);
        let (na, nb) = (norm(&ds), norm(&moved));
        assert_eq!(na.feature_ranges, nb.feature_ranges);
        let y: Vec<usize> = train.iter().map(|&r| ds.labels[r]).collect();
        let hyper = a.datasets[0].seeds[0].folds[fold].hyper;
        let fit = |d: &Dataset| {
            fit_model(
                model,
                &hyper,
                &cfg.settings,
                &d.features.select_rows(&train),
                &y,
                3,
                5,
                6,
            )
            .unwrap()
        };
        assert_eq!(fit(&na), fit(&nb));
    }
}

#[test]
fn too_many_folds_is_a_usage_error() {
    let mut cfg = config(ModelKind::IntrvflRls, 0);
    cfg.folds = 1000;
    let r = run_experiment(&cfg, &sets()).unwrap();
    assert!(r.datasets.iter().all(|d| d.error.is_some()));
    assert!(r.mean_accuracy.is_none());
}
