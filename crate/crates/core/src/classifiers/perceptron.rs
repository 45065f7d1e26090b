use super::prototype::{predict_nearest, PrototypeModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Refines a one-prototype-per-class model with the perceptron rule: for each
/// misclassified sample `x`, the true-class prototype gains `alpha * x` and
/// the predicted-class prototype loses `alpha * x`. Samples are visited in
/// order for up to `iters` passes; a pass without mistakes ends early.
pub fn perceptron_refine(
    model: &PrototypeModel,
    samples: &Matrix,
    labels: &[usize],
    alpha: f64,
    iters: usize,
) -> Result<PrototypeModel> {
    if model.p() != 1 {
        return Err(Error::InvalidArgument(format!(
            "perceptron refinement needs one prototype per class, got p={}",
            model.p()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if samples.cols() != model.n() || labels.len() != samples.rows() {
        return Err(Error::shapes(
            "perceptron_refine",
            samples.shape(),
            (labels.len(), model.n()),
        ));
    }
    let mut out = model.clone();
    // Class -> prototype index.
    let mut slot = vec![0; model.l()];
    for (j, &c) in model.class_of().iter().enumerate() {
        slot[c] = j;
    }
    for _ in 0..iters {
        let mut mistakes = 0;
        for (x, &y) in samples.iter_rows().zip(labels) {
            let (pred, _) = predict_nearest(&out, x)?;
            if pred == y {
                continue;
            }
            mistakes += 1;
            for (w, v) in out.prototype_mut(slot[y]).iter_mut().zip(x) {
                *w += alpha * v;
            }
            for (w, v) in out.prototype_mut(slot[pred]).iter_mut().zip(x) {
                *w -= alpha * v;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_hand_case() {
        let m = PrototypeModel::new(2, 1, 1, vec![0.0, 5.0], 1.0).unwrap();
        let x = Matrix::from_rows(&[[4.0]]).unwrap();
        let out = perceptron_refine(&m, &x, &[0], 0.5, 1).unwrap();
        assert_eq!(out.flat(), &[2.0, 3.0]);
    }

    #[test]
    fn no_updates_when_correct_or_zero_step() {
        let m = PrototypeModel::new(2, 1, 1, vec![0.0, 5.0], 1.0).unwrap();
        let good = Matrix::from_rows(&[[1.0], [6.0]]).unwrap();
        assert_eq!(perceptron_refine(&m, &good, &[0, 1], 0.5, 10).unwrap(), m);
        let bad = Matrix::from_rows(&[[4.0]]).unwrap();
        assert_eq!(perceptron_refine(&m, &bad, &[0], 0.0, 10).unwrap(), m);
    }

    #[test]
    fn rejects_multi_prototype_and_bad_alpha() {
        let m = PrototypeModel::new(2, 2, 1, vec![0.0, 1.0, 5.0, 6.0], 1.0).unwrap();
        let x = Matrix::from_rows(&[[4.0]]).unwrap();
        assert!(perceptron_refine(&m, &x, &[0], 0.5, 1).is_err());
        let m1 = PrototypeModel::new(2, 1, 1, vec![0.0, 5.0], 1.0).unwrap();
        assert!(perceptron_refine(&m1, &x, &[0], 1.5, 1).is_err());
    }
}
