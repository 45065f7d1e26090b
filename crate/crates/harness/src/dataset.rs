//! Comma-separated tabular datasets and min-max normalization.

use std::path::Path;

use hdlvq_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LabelPosition {
    #[default]
    Last,
    First,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub label_position: LabelPosition,
    pub header: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Matrix,
    /// Zero-based class index per sample.
    pub labels: Vec<usize>,
    /// Original label text, indexed by class.
    pub class_names: Vec<String>,
    /// Per-feature `(min, max)` used by [`normalize`]; empty until then.
    pub feature_ranges: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }
}

/// Parses a CSV file: one sample per line, numeric features, one label
/// column. Labels are mapped to class indices by first appearance.
pub fn load_dataset(path: &Path, opts: LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::data(path.display().to_string(), e.to_string()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_dataset(&name, &text, opts).map_err(|m| HarnessError::data(path.display().to_string(), m))
}

pub fn parse_dataset(
    name: &str,
    text: &str,
    opts: LoadOptions,
) -> std::result::Result<Dataset, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match width {
            None if record.len() < 2 => {
                return Err(format!(
                    "line {line}: need at least one feature and a label"
                ))
            }
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(format!(
                    "line {line}: ragged row with {} fields, expected {w}",
                    record.len()
                ))
            }
            Some(_) => {}
        }
        let (label, features): (&str, Vec<(usize, &str)>) = match opts.label_position {
            LabelPosition::Last => (
                &record[record.len() - 1],
                record.iter().enumerate().take(record.len() - 1).collect(),
            ),
            LabelPosition::First => (&record[0], record.iter().enumerate().skip(1).collect()),
        };
        for (col, field) in features {
            let v: f64 = field.parse().map_err(|_| {
                format!(
                    "line {line}, column {}: non-numeric feature {field:?}",
                    col + 1
                )
            })?;
            if !v.is_finite() {
                return Err(format!(
                    "line {line}, column {}: non-finite feature",
                    col + 1
                ));
            }
            values.push(v);
        }
        let class = match class_names.iter().position(|c| c == label) {
            Some(c) => c,
            None => {
                class_names.push(label.to_string());
                class_names.len() - 1
            }
        };
        labels.push(class);
    }

    let Some(width) = width else {
        return Err("empty file".into());
    };
    let features = Matrix::new(labels.len(), width - 1, values).map_err(|e| e.to_string())?;
    Ok(Dataset {
        name: name.to_string(),
        features,
        labels,
        class_names,
        feature_ranges: Vec::new(),
    })
}

/// Maps each feature to `[0, 1]` with whole-dataset min and max. Constant
/// features map to 0.
pub fn normalize(ds: &Dataset) -> Dataset {
    let k = ds.n_features();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); k];
    for row in ds.features.iter_rows() {
        for (r, &v) in ranges.iter_mut().zip(row) {
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
        }
    }
    let mut out = ds.clone();
    out.features = apply_ranges(&ds.features, &ranges);
    out.feature_ranges = ranges;
    out
}

/// Applies recorded `(min, max)` ranges, clamping into `[0, 1]`.
pub fn apply_ranges(features: &Matrix, ranges: &[(f64, f64)]) -> Matrix {
    let mut out = features.clone();
    for i in 0..out.rows() {
        for (v, &(lo, hi)) in out.row_mut(i).iter_mut().zip(ranges) {
            *v = if hi > lo {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    out
}
