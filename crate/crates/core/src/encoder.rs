//! Hidden-layer encoders.
//!
//! The integer encoder quantizes every feature in `[0, 1]` to a thermometer
//! code of length `N`, binds it (elementwise product) with that feature's
//! fixed bipolar hypervector, bundles the `K` bound vectors by addition and
//! clips the sum to `[-kappa, kappa]`. The conventional encoder is a random
//! affine projection followed by a logistic nonlinearity.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::seed;

/// Quantized scalar: the first `active` entries are `+1`, the rest `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThermometerCode {
    active: usize,
    entries: Vec<i8>,
}

impl ThermometerCode {
    pub fn active(&self) -> usize {
        self.active
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hamming(&self, other: &ThermometerCode) -> usize {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Number of active positions for `x` in a code of length `n`, rounding
/// halves up.
pub fn quantize(x: f64, n: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            what: "feature",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let v = (x * n as f64 + 0.5).floor() as usize;
    Ok(v.min(n))
}

pub fn thermometer(x: f64, n: usize) -> Result<ThermometerCode> {
    let active = quantize(x, n)?;
    let mut entries = vec![-1_i8; n];
    entries[..active].fill(1);
    Ok(ThermometerCode { active, entries })
}

/// Row-major `rows x cols` matrix with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipolarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl BipolarMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.data
    }
}

/// Draws a `k x n` bipolar matrix with independent equiprobable entries.
pub fn gen_input_weights(k: usize, n: usize, seed: u64) -> Result<BipolarMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "input weights need k >= 1 and n >= 1, got k={k}, n={n}"
        )));
    }
    let mut rng = seed::rng(seed);
    let total = k * n;
    let mut data = Vec::with_capacity(total);
    while data.len() < total {
        let bits: u64 = rng.gen();
        let take = (total - data.len()).min(64);
        data.extend((0..take).map(|b| if bits >> b & 1 == 1 { 1_i8 } else { -1 }));
    }
    Ok(BipolarMatrix {
        rows: k,
        cols: n,
        data,
    })
}

/// Integer activations, each within `[-kappa, kappa]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenActivation {
    pub values: Vec<i32>,
}

impl HiddenActivation {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct EncoderSpecDoc {
    k: usize,
    n: usize,
    kappa: u32,
    seed: u64,
}

/// Fixed integer encoder. Only `(k, n, kappa, seed)` are serialized; the
/// bipolar weights are regenerated from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EncoderSpecDoc", into = "EncoderSpecDoc")]
pub struct EncoderSpec {
    k: usize,
    n: usize,
    kappa: u32,
    seed: u64,
    w_in: BipolarMatrix,
}

impl TryFrom<EncoderSpecDoc> for EncoderSpec {
    type Error = Error;

    fn try_from(doc: EncoderSpecDoc) -> Result<Self> {
        EncoderSpec::new(doc.k, doc.n, doc.kappa, doc.seed)
    }
}

impl From<EncoderSpec> for EncoderSpecDoc {
    fn from(s: EncoderSpec) -> Self {
        EncoderSpecDoc {
            k: s.k,
            n: s.n,
            kappa: s.kappa,
            seed: s.seed,
        }
    }
}

impl EncoderSpec {
    pub fn new(k: usize, n: usize, kappa: u32, seed: u64) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidArgument("kappa must be >= 1".into()));
        }
        let w_in = gen_input_weights(k, n, seed)?;
        Ok(Self {
            k,
            n,
            kappa,
            seed,
            w_in,
        })
    }

    /// Builds an encoder around explicit weights (seed is recorded but not
    /// used to regenerate them).
    pub fn with_weights(w_in: BipolarMatrix, kappa: u32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidArgument("kappa must be >= 1".into()));
        }
        Ok(Self {
            k: w_in.rows,
            n: w_in.cols,
            kappa,
            seed: 0,
            w_in,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn w_in(&self) -> &BipolarMatrix {
        &self.w_in
    }

    /// Bind-bundle-clip activation of one sample.
    pub fn encode(&self, x: &[f64]) -> Result<HiddenActivation> {
        let mut sums = vec![0_i32; self.n];
        self.raw_sums_into(x, &mut sums)?;
        let kappa = self.kappa as i32;
        for v in &mut sums {
            *v = (*v).clamp(-kappa, kappa);
        }
        Ok(HiddenActivation { values: sums })
    }

    /// Unclipped bundle of bound thermometer codes.
    pub fn raw_sums(&self, x: &[f64]) -> Result<Vec<i32>> {
        let mut sums = vec![0_i32; self.n];
        self.raw_sums_into(x, &mut sums)?;
        Ok(sums)
    }

    fn raw_sums_into(&self, x: &[f64], sums: &mut [i32]) -> Result<()> {
        if x.len() != self.k {
            return Err(Error::lengths("encode_intrvfl", self.k, x.len()));
        }
        for (i, &xi) in x.iter().enumerate() {
            let v = quantize(xi, self.n)?;
            let w = self.w_in.row(i);
            // F[i][j] = +1 for j < v, -1 otherwise.
            for (s, &wij) in sums[..v].iter_mut().zip(&w[..v]) {
                *s += i32::from(wij);
            }
            for (s, &wij) in sums[v..].iter_mut().zip(&w[v..]) {
                *s -= i32::from(wij);
            }
        }
        Ok(())
    }

    /// Encodes every row of `x` (M x K) into an M x N activation matrix.
    pub fn encode_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let mut data = Vec::with_capacity(x.rows() * self.n);
        for row in x.iter_rows() {
            data.extend(self.encode(row)?.values.iter().map(|&v| f64::from(v)));
        }
        Matrix::new(x.rows(), self.n, data)
    }
}

#[inline]
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `h_j = logistic(sum_i x_i w[i][j] + b_j)`.
pub fn encode_conventional(x: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if x.len() != w.rows() || b.len() != w.cols() {
        return Err(Error::shapes(
            "encode_conventional",
            (x.len(), b.len()),
            w.shape(),
        ));
    }
    let mut z = b.to_vec();
    for (i, &xi) in x.iter().enumerate() {
        for (zj, wij) in z.iter_mut().zip(w.row(i)) {
            *zj += xi * wij;
        }
    }
    Ok(z.into_iter().map(logistic).collect())
}

#[derive(Serialize, Deserialize)]
struct ConventionalDoc {
    k: usize,
    n: usize,
    seed: u64,
}

/// Conventional RVFL hidden layer: weights and biases uniform on `[-1, 1]`,
/// logistic activation, no direct input-output links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConventionalDoc", into = "ConventionalDoc")]
pub struct ConventionalEncoder {
    seed: u64,
    weights: Matrix,
    bias: Vec<f64>,
}

impl TryFrom<ConventionalDoc> for ConventionalEncoder {
    type Error = Error;

    fn try_from(d: ConventionalDoc) -> Result<Self> {
        ConventionalEncoder::new(d.k, d.n, d.seed)
    }
}

impl From<ConventionalEncoder> for ConventionalDoc {
    fn from(e: ConventionalEncoder) -> Self {
        ConventionalDoc {
            k: e.weights.rows(),
            n: e.weights.cols(),
            seed: e.seed,
        }
    }
}

impl ConventionalEncoder {
    pub fn new(k: usize, n: usize, seed: u64) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "conventional encoder needs k >= 1 and n >= 1, got k={k}, n={n}"
            )));
        }
        let mut rng = seed::rng(seed);
        let weights: Vec<f64> = (0..k * n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let bias: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Ok(Self {
            seed,
            weights: Matrix::new(k, n, weights)?,
            bias,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.rows()
    }

    pub fn n(&self) -> usize {
        self.weights.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        encode_conventional(x, &self.weights, &self.bias)
    }

    pub fn encode_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let mut data = Vec::with_capacity(x.rows() * self.n());
        for row in x.iter_rows() {
            data.extend(self.encode(row)?);
        }
        Matrix::new(x.rows(), self.n(), data)
    }
}
