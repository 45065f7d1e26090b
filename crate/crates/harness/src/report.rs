//! Paired comparison of two experiment results.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::experiment::{mean, ExperimentResult};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPair {
    pub dataset: String,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model_a: String,
    pub model_b: String,
    pub pairs: Vec<AccuracyPair>,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean of `b - a`.
    pub mean_difference: f64,
    /// `None` when either side has zero variance.
    pub pearson_r: Option<f64>,
    pub t_statistic: Option<f64>,
    /// Two-sided paired t-test; `None` when undefined.
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Comparison {
    /// `dataset,a,b` rows for scatter plots.
    pub fn scatter_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["dataset", &self.model_a, &self.model_b])
            .map_err(|e| HarnessError::data("scatter", e.to_string()))?;
        for p in &self.pairs {
            w.write_record([p.dataset.clone(), p.a.to_string(), p.b.to_string()])
                .map_err(|e| HarnessError::data("scatter", e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::data("scatter", e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Sample Pearson correlation, or `None` if either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Two-sided paired t-test on `b - a`: `(t, p)`, or `None` when the
/// differences have zero variance or there are fewer than two pairs.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let n = d.len() as f64;
    let md = mean(&d);
    let var = d.iter().map(|v| (v - md) * (v - md)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return None;
    }
    let t = md / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).ok()?;
    Some((t, 2.0 * dist.cdf(-t.abs())))
}

/// Pairs the per-dataset mean accuracies of `a` and `b`. Both results must
/// cover the same completed datasets in the same order.
pub fn compare_report(a: &ExperimentResult, b: &ExperimentResult) -> Result<Comparison> {
    let da = a.dataset_means();
    let db = b.dataset_means();
    let names_a: Vec<&str> = da.iter().map(|p| p.0).collect();
    let names_b: Vec<&str> = db.iter().map(|p| p.0).collect();
    if names_a != names_b {
        return Err(HarnessError::Usage(format!(
            "dataset lists differ: {names_a:?} vs {names_b:?}"
        )));
    }
    if da.is_empty() {
        return Err(HarnessError::Usage(
            "no completed datasets to compare".into(),
        ));
    }
    let va: Vec<f64> = da.iter().map(|p| p.1).collect();
    let vb: Vec<f64> = db.iter().map(|p| p.1).collect();
    let pearson_r = pearson(&va, &vb);
    let test = paired_t_test(&va, &vb);
    let mut notes = Vec::new();
    if pearson_r.is_none() {
        notes.push("correlation undefined: an accuracy series has zero variance".into());
    }
    if test.is_none() {
        notes.push(
            "t-test undefined: differences have zero variance or fewer than two datasets".into(),
        );
    }
    let diffs: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| y - x).collect();
    Ok(Comparison {
        model_a: a.config.model.to_string(),
        model_b: b.config.model.to_string(),
        pairs: da
            .iter()
            .zip(&db)
            .map(|(x, y)| AccuracyPair {
                dataset: x.0.to_string(),
                a: x.1,
                b: y.1,
            })
            .collect(),
        mean_a: mean(&va),
        mean_b: mean(&vb),
        mean_difference: mean(&diffs),
        pearson_r,
        t_statistic: test.map(|t| t.0),
        p_value: test.map(|t| t.1),
        notes,
    })
}
