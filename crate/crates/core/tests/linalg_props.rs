use hdlvq_core::linalg::{invert, matmul, qr_factor, solve_upper_triangular, transpose_matmul};
use hdlvq_core::Matrix;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| Matrix::new(rows, cols, v).unwrap())
}

fn square() -> impl Strategy<Value = Matrix> {
    (1usize..12).prop_flat_map(|n| matrix(n, n))
}

// Naive triple loop, independent of the library's blocked/strided kernels.
fn naive_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut s = 0.0;
            for k in 0..a.cols() {
                s += a.get(i, k) * b.get(k, j);
            }
            c.set(i, j, s);
        }
    }
    c
}

proptest! {
    #[test]
    fn qr_reconstructs(a in square()) {
        let n = a.rows();
        let (q, r) = qr_factor(&a).unwrap();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let err = naive_mul(&q, &r).max_abs_diff(&a).unwrap();
        prop_assert!(err <= 1e-10 * n as f64 * scale, "err {err}");
        for i in 0..n {
            for j in 0..i {
                prop_assert_eq!(r.get(i, j), 0.0);
            }
        }
        let qtq = transpose_matmul(&q, &q).unwrap();
        prop_assert!(qtq.max_abs_diff(&Matrix::identity(n)).unwrap() < 1e-12);
    }

    #[test]
    fn triangular_solve_recovers_rhs(
        n in 1usize..10,
        seed in any::<u64>(),
    ) {
        // Well-conditioned upper triangle: unit-scale diagonal dominance.
        let mut r = Matrix::zeros(n, n);
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for i in 0..n {
            for j in i..n {
                r.set(i, j, if i == j { 2.0 + next().abs() } else { 0.5 * next() });
            }
        }
        let b = Matrix::new(n, 2, (0..2 * n).map(|_| next()).collect()).unwrap();
        let x = solve_upper_triangular(&r, &b).unwrap();
        let resid = naive_mul(&r, &x).max_abs_diff(&b).unwrap();
        prop_assert!(resid <= 1e-12 * n as f64, "resid {resid}");
    }

    #[test]
    fn matmul_matches_naive_and_associates(
        (a, b, c) in (1usize..6, 1usize..6, 1usize..6, 1usize..6)
            .prop_flat_map(|(p, q, r, s)| (matrix(p, q), matrix(q, r), matrix(r, s)))
    ) {
        let ab = matmul(&a, &b).unwrap();
        prop_assert!(ab.max_abs_diff(&naive_mul(&a, &b)).unwrap() <= 1e-12 * ab.max_abs().max(1.0));
        let left = matmul(&ab, &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        let scale = left.max_abs().max(right.max_abs()).max(1.0);
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn inverse_of_diagonally_dominant(a in square()) {
        let n = a.rows();
        let mut m = a.clone();
        for i in 0..n {
            let row_sum: f64 = a.row(i).iter().map(|v| v.abs()).sum();
            m.set(i, i, row_sum + 1.0);
        }
        let inv = invert(&m).unwrap();
        prop_assert!(matmul(&m, &inv).unwrap().max_abs_diff(&Matrix::identity(n)).unwrap() < 1e-10);
    }
}

#[test]
fn singular_inputs_are_reported() {
    let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
    assert!(invert(&a).is_err());
    assert!(hdlvq_core::linalg::QrFactorization::new(&a)
        .and_then(|qr| qr.solve(&Matrix::identity(2)))
        .is_err());
}
