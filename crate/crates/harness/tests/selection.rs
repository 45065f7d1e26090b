mod common;

use common::blobs;
use hdlvq_core::classifiers::{one_hot, rls_fit, RlsPath};
use hdlvq_core::encoder::EncoderSpec;
use hdlvq_core::Error;
use hdlvq_harness::dataset::normalize;
use hdlvq_harness::grid::{grid_search, GridSpec, SearchSeeds};
use hdlvq_harness::pipeline::{fit_model, Encoder, FitSettings, Hyper, ModelKind, Readout};

const SEEDS: SearchSeeds = SearchSeeds {
    encoder: 7,
    noise: 8,
    split: 9,
};

fn grid(n: Vec<usize>, kappa: Vec<u32>) -> GridSpec {
    GridSpec {
        n,
        kappa,
        ..GridSpec::default()
    }
}

#[test]
fn single_point_grid_returns_it() {
    let ds = normalize(&blobs("one", 20, 3, 3, 1));
    let g = GridSpec {
        n: vec![60],
        kappa: vec![3],
        lambda: vec![0.5],
        beta: vec![4.0],
        p: vec![2],
    };
    for kind in ModelKind::ALL {
        let out = grid_search(
            kind,
            &g,
            &FitSettings::default(),
            &ds.features,
            &ds.labels,
            3,
            SEEDS,
        )
        .unwrap();
        assert_eq!(out.best_index, 0);
        assert_eq!(out.scores.len(), 1);
        assert_eq!(out.best, g.points(kind)[0]);
    }
}

#[test]
fn strictly_better_point_wins_even_when_later() {
    let ds = normalize(&blobs("argmax", 20, 3, 3, 2));
    // A single hidden unit cannot tell three classes apart.
    let g = grid(vec![1, 250], vec![7]);
    let out = grid_search(
        ModelKind::IntrvflCentroid,
        &g,
        &FitSettings::default(),
        &ds.features,
        &ds.labels,
        3,
        SEEDS,
    )
    .unwrap();
    let acc: Vec<f64> = out.scores.iter().map(|s| s.accuracy.unwrap()).collect();
    assert!(acc[1] > acc[0], "{acc:?}");
    assert_eq!(out.best_index, 1);
    assert_eq!(out.best.n, Some(250));
    assert_eq!(out.inner_accuracy, acc[1]);
}

#[test]
fn ties_go_to_the_first_point() {
    let mut ds = blobs("tie", 20, 2, 2, 3);
    // Push the classes to opposite corners so every point is perfect.
    for i in 0..ds.len() {
        let shift = if ds.labels[i] == 0 { -0.4 } else { 0.4 };
        for j in 0..2 {
            let v = ds.features.get(i, j);
            ds.features
                .set(i, j, (0.5 + shift + 0.05 * (v - 0.5)).clamp(0.0, 1.0));
        }
    }
    let ds = normalize(&ds);
    let g = grid(vec![100, 200, 300], vec![3, 7]);
    let out = grid_search(
        ModelKind::IntrvflCentroid,
        &g,
        &FitSettings::default(),
        &ds.features,
        &ds.labels,
        2,
        SEEDS,
    )
    .unwrap();
    assert!(out.scores.iter().all(|s| s.accuracy == Some(1.0)));
    assert_eq!(out.best_index, 0);
    assert_eq!((out.best.n, out.best.kappa), (Some(100), Some(3)));
}

#[test]
fn ridge_pipeline_is_encoder_then_solver() {
    let ds = normalize(&blobs("compose", 15, 4, 3, 4));
    let hyper = Hyper {
        n: Some(120),
        kappa: Some(7),
        lambda: Some(0.25),
        ..Hyper::default()
    };
    let model = fit_model(
        ModelKind::IntrvflRls,
        &hyper,
        &FitSettings::default(),
        &ds.features,
        &ds.labels,
        3,
        42,
        0,
    )
    .unwrap();
    let spec = EncoderSpec::new(4, 120, 7, 42).unwrap();
    let h = spec.encode_matrix(&ds.features).unwrap();
    let manual = rls_fit(&h, &one_hot(&ds.labels, 3).unwrap(), 0.25, RlsPath::Qr).unwrap();
    assert_eq!(model.encoder, Encoder::Integer(spec));
    assert_eq!(model.readout, Readout::Linear(manual));
}

#[test]
fn same_seed_same_model_and_other_seed_other_weights() {
    let ds = normalize(&blobs("seeded", 15, 3, 2, 5));
    let hyper = Hyper {
        n: Some(80),
        kappa: Some(3),
        beta: Some(5.0),
        p: Some(2),
        ..Hyper::default()
    };
    let settings = FitSettings {
        budget: 40,
        ..FitSettings::default()
    };
    let fit = |enc, noise| {
        fit_model(
            ModelKind::IntrvflGlvq,
            &hyper,
            &settings,
            &ds.features,
            &ds.labels,
            2,
            enc,
            noise,
        )
        .unwrap()
    };
    assert_eq!(fit(1, 2), fit(1, 2));
    let (a, b) = (fit(1, 2), fit(3, 2));
    match (&a.encoder, &b.encoder) {
        (Encoder::Integer(x), Encoder::Integer(y)) => assert_ne!(x.w_in(), y.w_in()),
        _ => panic!("integer encoders expected"),
    }
}

#[test]
fn absent_class_is_rejected() {
    let ds = normalize(&blobs("absent", 10, 2, 2, 6));
    let only_zero: Vec<usize> = (0..ds.len()).filter(|&i| ds.labels[i] == 0).collect();
    let x = ds.features.select_rows(&only_zero);
    let y = vec![0; only_zero.len()];
    let hyper = Hyper {
        n: Some(50),
        kappa: Some(3),
        ..Hyper::default()
    };
    let err = fit_model(
        ModelKind::IntrvflCentroid,
        &hyper,
        &FitSettings::default(),
        &x,
        &y,
        2,
        1,
        1,
    );
    assert_eq!(err.unwrap_err(), Error::EmptyClass { class: 1 });
}
