//! Dense row-major real matrices with the handful of kernels the ridge
//! readout needs: products, Householder QR, triangular solves and a
//! Gauss-Jordan inverse for the straightforward path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which a pivot is treated as zero.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shapes("Matrix::new", (rows, cols), (1, data.len())));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shapes("Matrix::from_rows", (i, cols), (i, r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Adds `value` to every diagonal entry of a square matrix.
    pub fn add_diagonal(&mut self, value: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += value;
        }
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::shapes("max_abs_diff", self.shape(), other.shape()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Matrix-vector product `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::shapes("mul_vec", self.shape(), (x.len(), 1)));
        }
        Ok(self.iter_rows().map(|r| dot(r, x)).collect())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Standard product `a * b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shapes("matmul", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik != 0.0 {
                axpy(aik, b.row(k), out_row);
            }
        }
    }
    Ok(out)
}

/// `aᵀ * b` without materializing the transpose.
pub fn transpose_matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::shapes("transpose_matmul", a.shape(), b.shape()));
    }
    let mut out = Matrix::zeros(a.cols, b.cols);
    for k in 0..a.rows {
        let b_row = b.row(k);
        for (i, &aki) in a.row(k).iter().enumerate() {
            if aki != 0.0 {
                axpy(aki, b_row, &mut out.data[i * b.cols..(i + 1) * b.cols]);
            }
        }
    }
    Ok(out)
}

/// Householder QR factorization of a square matrix.
///
/// The reflectors are kept in compact form so that `Qᵀb` can be applied
/// without forming `Q`; [`QrFactorization::q`] materializes it on demand.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    n: usize,
    // Reflector k lives in rows k..n of column k of `v`, stored row-major.
    v: Matrix,
    tau: Vec<f64>,
    r: Matrix,
}

impl QrFactorization {
    pub fn new(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::NotSquare {
                op: "qr_factor",
                rows: a.rows,
                cols: a.cols,
            });
        }
        let n = a.rows;
        let mut r = a.clone();
        let mut v = Matrix::zeros(n, n);
        let mut tau = vec![0.0; n];
        let mut w = vec![0.0; n];

        for k in 0..n {
            let norm = (k..n).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if r.get(k, k) >= 0.0 { -norm } else { norm };
            // v = x - alpha e1, normalized so that v[k] = 1.
            let v0 = r.get(k, k) - alpha;
            v.set(k, k, 1.0);
            for i in k + 1..n {
                v.set(i, k, r.get(i, k) / v0);
            }
            tau[k] = -v0 / alpha;

            // R[k.., k..] -= tau v (vᵀ R[k.., k..])
            let w = &mut w[k..n];
            w.fill(0.0);
            for i in k..n {
                let vi = v.get(i, k);
                if vi != 0.0 {
                    axpy(vi, &r.row(i)[k..], w);
                }
            }
            for i in k..n {
                let vi = v.get(i, k);
                if vi != 0.0 {
                    axpy(-tau[k] * vi, w, &mut r.row_mut(i)[k..]);
                }
            }
            r.set(k, k, alpha);
            for i in k + 1..n {
                r.set(i, k, 0.0);
            }
        }
        Ok(Self { n, v, tau, r })
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn q(&self) -> Matrix {
        let n = self.n;
        let mut q = Matrix::identity(n);
        // Q = H_0 H_1 ... H_{n-1}; right-multiply each row by the reflectors.
        for k in 0..n {
            if self.tau[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let row = q.row_mut(i);
                let s: f64 = (k..n).map(|j| row[j] * self.v.get(j, k)).sum();
                if s != 0.0 {
                    for j in k..n {
                        row[j] -= self.tau[k] * s * self.v.get(j, k);
                    }
                }
            }
        }
        q
    }

    /// Overwrites `b` (n x l) with `Qᵀ b`.
    pub fn apply_qt(&self, b: &mut Matrix) -> Result<()> {
        if b.rows != self.n {
            return Err(Error::shapes("apply_qt", (self.n, self.n), b.shape()));
        }
        let mut w = vec![0.0; b.cols];
        for k in 0..self.n {
            if self.tau[k] == 0.0 {
                continue;
            }
            w.fill(0.0);
            for i in k..self.n {
                axpy(self.v.get(i, k), b.row(i), &mut w);
            }
            for i in k..self.n {
                axpy(-self.tau[k] * self.v.get(i, k), &w, b.row_mut(i));
            }
        }
        Ok(())
    }

    /// Solves `QR x = b` for every column of `b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let mut z = b.clone();
        self.apply_qt(&mut z)?;
        solve_upper_triangular(&self.r, &z)
    }
}

/// Returns `(Q, R)` with `Q` orthogonal and `R` upper-triangular.
pub fn qr_factor(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let qr = QrFactorization::new(a)?;
    Ok((qr.q(), qr.r))
}

/// Back-substitution for `R X = B`. Entries of `r` below the diagonal are
/// ignored.
pub fn solve_upper_triangular(r: &Matrix, b: &Matrix) -> Result<Matrix> {
    if r.rows != r.cols {
        return Err(Error::NotSquare {
            op: "solve_upper_triangular",
            rows: r.rows,
            cols: r.cols,
        });
    }
    if b.rows != r.rows {
        return Err(Error::shapes(
            "solve_upper_triangular",
            r.shape(),
            b.shape(),
        ));
    }
    let n = r.rows;
    let mut max_upper = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            max_upper = max_upper.max(r.get(i, j).abs());
        }
    }
    let threshold = SINGULAR_RTOL * max_upper;
    let mut x = b.clone();
    for i in (0..n).rev() {
        let pivot = r.get(i, i);
        if pivot.abs() < threshold || pivot == 0.0 {
            return Err(Error::Singular { pivot: i, hint: "" });
        }
        for j in i + 1..n {
            let rij = r.get(i, j);
            if rij != 0.0 {
                let (head, tail) = x.data.split_at_mut(j * x.cols);
                let xi = &mut head[i * x.cols..(i + 1) * x.cols];
                axpy(-rij, &tail[..x.cols], xi);
            }
        }
        for v in x.row_mut(i) {
            *v /= pivot;
        }
    }
    Ok(x)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    if a.rows != a.cols {
        return Err(Error::NotSquare {
            op: "invert",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let threshold = SINGULAR_RTOL * a.max_abs();
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, m.get(i, k).abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best < threshold || best == 0.0 {
            return Err(Error::Singular { pivot: k, hint: "" });
        }
        if p != k {
            swap_rows(&mut m, p, k);
            swap_rows(&mut inv, p, k);
        }
        let d = 1.0 / m.get(k, k);
        m.row_mut(k).iter_mut().for_each(|v| *v *= d);
        inv.row_mut(k).iter_mut().for_each(|v| *v *= d);
        let pivot_m = m.row(k).to_vec();
        let pivot_inv = inv.row(k).to_vec();
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m.get(i, k);
            if f != 0.0 {
                axpy(-f, &pivot_m, m.row_mut(i));
                axpy(-f, &pivot_inv, inv.row_mut(i));
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    let cols = m.cols;
    for j in 0..cols {
        m.data.swap(a * cols + j, b * cols + j);
    }
}
