use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::linalg::{invert, matmul, transpose_matmul, Matrix, QrFactorization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RlsPath {
    /// Explicit inverse of `HᵀH + λI`.
    Direct,
    /// QR factorization of `HᵀH + λI`, then back-substitution.
    #[default]
    Qr,
}

/// Ridge readout `ŷ = W h` with `W` of shape `L x N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearReadout {
    pub w_out: Matrix,
    pub lambda: f64,
}

/// `M x L` indicator matrix: 1 in the true-class column, 0 elsewhere.
pub fn one_hot(labels: &[usize], l: usize) -> Result<Matrix> {
    let mut y = Matrix::zeros(labels.len(), l);
    for (i, &c) in labels.iter().enumerate() {
        if c >= l {
            return Err(Error::InvalidArgument(format!(
                "label {c} out of range for l={l}"
            )));
        }
        y.set(i, c, 1.0);
    }
    Ok(y)
}

/// Normal-equation pieces `HᵀH` and `HᵀY`, reusable across `λ` values.
#[derive(Debug, Clone)]
pub struct RlsSystem {
    gram: Matrix,
    rhs: Matrix,
}

impl RlsSystem {
    pub fn new(h: &Matrix, y: &Matrix) -> Result<Self> {
        if h.rows() != y.rows() {
            return Err(Error::shapes("rls_fit", h.shape(), y.shape()));
        }
        Ok(Self {
            gram: transpose_matmul(h, h)?,
            rhs: transpose_matmul(h, y)?,
        })
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn rhs(&self) -> &Matrix {
        &self.rhs
    }

    /// `HᵀH + λI`.
    pub fn regularized(&self, lambda: f64) -> Matrix {
        let mut a = self.gram.clone();
        a.add_diagonal(lambda);
        a
    }

    pub fn solve(&self, lambda: f64, path: RlsPath) -> Result<LinearReadout> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        let a = self.regularized(lambda);
        let solved = match path {
            RlsPath::Qr => QrFactorization::new(&a).and_then(|qr| qr.solve(&self.rhs)),
            RlsPath::Direct => invert(&a).and_then(|inv| matmul(&inv, &self.rhs)),
        };
        let w_t = solved.map_err(|e| match e {
            Error::Singular { pivot, .. } if lambda == 0.0 => Error::Singular {
                pivot,
                hint: "; HᵀH is singular, use lambda > 0",
            },
            other => other,
        })?;
        Ok(LinearReadout {
            w_out: w_t.transpose(),
            lambda,
        })
    }
}

/// `Wᵀ = (HᵀH + λI)⁻¹ HᵀY`.
pub fn rls_fit(h: &Matrix, y_onehot: &Matrix, lambda: f64, path: RlsPath) -> Result<LinearReadout> {
    RlsSystem::new(h, y_onehot)?.solve(lambda, path)
}

/// Class with the largest score and the score vector. Ties go to the lowest
/// class index.
pub fn rls_predict(readout: &LinearReadout, h: &[f64]) -> Result<(usize, Vec<f64>)> {
    let scores = readout.w_out.mul_vec(h)?;
    Ok((argmax(&scores), scores))
}
