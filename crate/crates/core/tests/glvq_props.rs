use hdlvq_core::classifiers::{
    centroid_fit, glvq_cost, glvq_fit, glvq_gradient, glvq_mu, predict_nearest, Optimizer,
    PrototypeModel,
};
use hdlvq_core::seed;
use hdlvq_core::Matrix;
use rand::Rng;

struct Instance {
    model: PrototypeModel,
    x: Matrix,
    y: Vec<usize>,
}

fn random_instance(rng: &mut seed::Rng, beta: f64) -> Instance {
    let n = rng.gen_range(1..=10);
    let l = rng.gen_range(2..=4);
    let p = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=50);
    let protos: Vec<f64> = (0..l * p * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = Matrix::new(m, n, (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let y = (0..m).map(|_| rng.gen_range(0..l)).collect();
    Instance {
        model: PrototypeModel::new(l, p, n, protos, beta).unwrap(),
        x,
        y,
    }
}

/// Cost written directly from its definition, sharing no code with the
/// library.
fn oracle_cost(flat: &[f64], inst: &Instance) -> f64 {
    let (l, p, n, beta) = (
        inst.model.l(),
        inst.model.p(),
        inst.model.n(),
        inst.model.beta(),
    );
    let mut total = 0.0;
    for (i, &c) in inst.y.iter().enumerate() {
        let mut d_plus = f64::INFINITY;
        let mut d_minus = f64::INFINITY;
        for j in 0..l * p {
            let d: f64 = (0..n)
                .map(|k| (inst.x.get(i, k) - flat[j * n + k]).powi(2))
                .sum();
            if j / p == c {
                d_plus = d_plus.min(d);
            } else {
                d_minus = d_minus.min(d);
            }
        }
        let mu = (d_plus - d_minus) / (d_plus + d_minus);
        total += 1.0 / (1.0 + (-beta * mu).exp());
    }
    total
}

#[test]
fn cost_matches_definition() {
    let mut rng = seed::rng(1);
    for beta in [1.0, 5.0, 15.0] {
        for _ in 0..20 {
            let inst = random_instance(&mut rng, beta);
            let lib = glvq_cost(&inst.model, &inst.x, &inst.y).unwrap();
            let oracle = oracle_cost(inst.model.flat(), &inst);
            assert!((lib - oracle).abs() <= 1e-12 * oracle.max(1.0));
            assert!(lib > 0.0 && lib < inst.y.len() as f64);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = seed::rng(2);
    let h = 1e-5;
    for beta in [1.0, 5.0, 15.0] {
        for _ in 0..20 {
            let inst = random_instance(&mut rng, beta);
            let g = glvq_gradient(&inst.model, &inst.x, &inst.y).unwrap();
            let mut flat = inst.model.flat().to_vec();
            let mut fd = vec![0.0; flat.len()];
            for (i, slot) in fd.iter_mut().enumerate() {
                let orig = flat[i];
                flat[i] = orig + h;
                let up = oracle_cost(&flat, &inst);
                flat[i] = orig - h;
                let down = oracle_cost(&flat, &inst);
                flat[i] = orig;
                *slot = (up - down) / (2.0 * h);
            }
            let diff = g
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = g.iter().chain(&fd).map(|v| v.abs()).fold(0.0, f64::max);
            assert!(
                diff <= 1e-5 * scale.max(1e-12),
                "beta {beta}: {diff} vs {scale}"
            );
        }
    }
}

#[test]
fn negative_mu_iff_correct_nearest_prototype() {
    let mut rng = seed::rng(3);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 1.0);
        for (i, &c) in inst.y.iter().enumerate() {
            let info = glvq_mu(inst.x.row(i), &inst.model, c).unwrap();
            assert!((-1.0..=1.0).contains(&info.mu));
            let (pred, _) = predict_nearest(&inst.model, inst.x.row(i)).unwrap();
            if info.mu != 0.0 {
                assert_eq!(info.mu < 0.0, pred == c);
            }
        }
    }
}

#[test]
fn closer_correct_prototype_lowers_mu_and_cost() {
    // 1-D: sample at 0, class-0 prototype at a, class-1 prototype at 3.
    let x = Matrix::from_rows(&[[0.0]]).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for a in [2.0, 1.5, 1.0, 0.5, 0.1] {
        let m = PrototypeModel::new(2, 1, 1, vec![a, 3.0], 4.0).unwrap();
        let mu = glvq_mu(&[0.0], &m, 0).unwrap().mu;
        let e = glvq_cost(&m, &x, &[0]).unwrap();
        if let Some((pm, pe)) = prev {
            assert!(mu < pm && e < pe);
        }
        prev = Some((mu, e));
    }
}

#[test]
fn one_gradient_step_attracts_and_repels() {
    let mut rng = seed::rng(4);
    for _ in 0..50 {
        let n = rng.gen_range(1..6);
        let flat: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = PrototypeModel::new(2, 1, n, flat.clone(), 3.0).unwrap();
        let x = Matrix::new(1, n, xs.clone()).unwrap();
        let g = glvq_gradient(&m, &x, &[0]).unwrap();
        let step = 1e-3;
        let moved: Vec<f64> = flat.iter().zip(&g).map(|(w, gi)| w - step * gi).collect();
        let dist = |w: &[f64]| w.iter().zip(&xs).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        assert!(dist(&moved[..n]) < dist(&flat[..n]));
        assert!(dist(&moved[n..]) > dist(&flat[n..]));
    }
}

#[test]
fn unused_prototypes_get_no_gradient() {
    // The third prototype is far from every sample and never nearest.
    let m = PrototypeModel::new(2, 2, 1, vec![0.0, 100.0, 1.0, 2.0], 1.0).unwrap();
    let x = Matrix::from_rows(&[[0.2], [0.9]]).unwrap();
    let g = glvq_gradient(&m, &x, &[0, 1]).unwrap();
    assert_eq!(g[1], 0.0);
}

#[test]
fn separable_clusters_are_learned() {
    let mut rng = seed::rng(5);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let c = i % 2;
        let cx = if c == 0 { -1.0 } else { 1.0 };
        rows.push([cx + rng.gen_range(-0.4..0.4), rng.gen_range(-1.0..1.0)]);
        y.push(c);
    }
    let x = Matrix::from_rows(&rows).unwrap();
    // Start from swapped centroids so the optimizer has to move them.
    let c = centroid_fit(&x, &y, 2).unwrap();
    let swapped = [c.prototype(1), c.prototype(0)].concat();
    let init = PrototypeModel::new(2, 1, 2, swapped, 2.0).unwrap();
    let (model, report) = glvq_fit(&x, &y, &init, 100, &Optimizer::default()).unwrap();
    assert!(report.optimize.iterations <= 100);
    assert!(report.optimize.final_value <= report.initial_cost);
    let hits = (0..40)
        .filter(|&i| model.predict(x.row(i)).unwrap() == y[i])
        .count();
    assert_eq!(hits, 40);
}

#[test]
fn budget_is_respected_and_zero_budget_is_identity() {
    let mut rng = seed::rng(6);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, 5.0);
        let (same, r0) = glvq_fit(&inst.x, &inst.y, &inst.model, 0, &Optimizer::default()).unwrap();
        assert_eq!(same, inst.model);
        assert_eq!(r0.optimize.iterations, 0);
        let (_, r) = glvq_fit(&inst.x, &inst.y, &inst.model, 10, &Optimizer::default()).unwrap();
        assert!(r.optimize.iterations <= 10);
        assert!(r.optimize.final_value <= r.initial_cost);
    }
}

#[test]
fn prediction_ignores_monotone_distance_transforms() {
    let mut rng = seed::rng(7);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, 1.0);
        let h = inst.x.row(0);
        let (pred, d) = predict_nearest(&inst.model, h).unwrap();
        for f in [|v: f64| v + 3.0, |v: f64| 2.5 * v] {
            let t: Vec<f64> = d.iter().map(|&v| f(v)).collect();
            let best = (0..t.len()).fold(0, |b, j| if t[j] < t[b] { j } else { b });
            assert_eq!(inst.model.class_of()[best], pred);
        }
    }
}
