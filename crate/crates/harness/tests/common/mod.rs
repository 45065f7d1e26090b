use hdlvq_core::{seed, Matrix};
use hdlvq_harness::dataset::Dataset;
use rand::Rng;

/// Gaussian-ish blobs in the unit cube, `per_class` samples per class.
pub fn blobs(name: &str, per_class: usize, k: usize, l: usize, seed_value: u64) -> Dataset {
    let mut rng = seed::rng(seed_value);
    let centers: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..k).map(|_| rng.gen_range(0.2..0.8)).collect())
        .collect();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * l {
        let c = i % l;
        for &mu in &centers[c] {
            let spread: f64 = (0..3).map(|_| rng.gen_range(-0.1..0.1)).sum();
            data.push((mu + spread).clamp(0.0, 1.0));
        }
        labels.push(c);
    }
    Dataset {
        name: name.into(),
        features: Matrix::new(per_class * l, k, data).unwrap(),
        labels,
        class_names: (0..l).map(|c| format!("c{c}")).collect(),
        feature_ranges: Vec::new(),
    }
}
