//! Datasets: numeric CSV ingestion and seeded synthetic generators.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LossFamily, LossTask, Targets};

/// Row-major inputs with one real target per row (class indices for
/// classification are stored as whole numbers).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<f64>,
    pub n: usize,
    pub d: usize,
    pub targets: Vec<f64>,
    /// Generating weights (`d` weights, then the bias) for linear data.
    pub true_weights: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds the loss task for `family`, converting targets as needed.
    pub fn to_task(&self, family: LossFamily) -> Result<LossTask> {
        let targets = match family {
            LossFamily::LeastSquares | LossFamily::Logistic => Targets::Real(self.targets.clone()),
            LossFamily::MlpXent => {
                let mut labels = Vec::with_capacity(self.n);
                for (i, &y) in self.targets.iter().enumerate() {
                    if y < 0.0 || y.fract() != 0.0 {
                        return Err(Error::invalid("targets", format!("row {} has non-integer class {y}", i + 1)));
                    }
                    labels.push(y as usize);
                }
                let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
                Targets::Class { labels, classes }
            }
        };
        LossTask::new(family, self.inputs.clone(), self.d, targets)
    }
}

/// Reads a numeric CSV with a header row. `target_column` is a header name
/// or a 0-based column index; the remaining columns become the inputs.
pub fn load_csv(path: &Path, target_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let target = headers
        .iter()
        .position(|h| h == target_column)
        .or_else(|| target_column.parse::<usize>().ok().filter(|&i| i < headers.len()))
        .ok_or_else(|| Error::invalid("target_column", format!("`{target_column}` is not a column of {}", path.display())))?;
    if headers.len() < 2 {
        return Err(Error::invalid("data", "need at least one feature column besides the target"));
    }
    let d = headers.len() - 1;
    let (mut inputs, mut targets) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row_no = row + 1;
        if record.len() != headers.len() {
            return Err(parse_error(path, row_no, format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let v = match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ if cell.is_empty() => return Err(parse_error(path, row_no, format!("missing value in column {c}"))),
                _ => return Err(parse_error(path, row_no, format!("non-numeric value `{cell}` in column {c}"))),
            };
            if c == target {
                targets.push(v);
            } else {
                inputs.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, message: "empty dataset".into() });
    }
    Ok(Dataset { n: targets.len(), inputs, d, targets, true_weights: None })
}

/// Data row `row` (1-based) lives on file line `row + 1`.
fn parse_error(path: &Path, row: usize, message: String) -> Error {
    Error::Parse { path: path.to_path_buf(), line: row + 1, message: format!("row {row}: {message}") }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse { path: path.to_path_buf(), line, message: format!("{other:?}") },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// `y = xᵀw* + b* + noise·ε`.
    Linear,
    /// `y = 1[xᵀw* + b* + noise·ε > 0]`.
    Logistic,
    /// Labels from a random tanh teacher network with three classes, logits
    /// perturbed by `noise·ε`.
    MlpTeacher,
}

impl SyntheticKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(SyntheticKind::Linear),
            "logistic" => Ok(SyntheticKind::Logistic),
            "mlp-teacher" => Ok(SyntheticKind::MlpTeacher),
            other => Err(Error::invalid("kind", format!("unknown synthetic kind `{other}`"))),
        }
    }

    pub fn for_family(family: LossFamily) -> Self {
        match family {
            LossFamily::LeastSquares => SyntheticKind::Linear,
            LossFamily::Logistic => SyntheticKind::Logistic,
            LossFamily::MlpXent => SyntheticKind::MlpTeacher,
        }
    }
}

pub const TEACHER_CLASSES: usize = 3;
const TEACHER_HIDDEN: usize = 8;

/// Standard-normal inputs and targets from a random generating model.
pub fn gen_synthetic(kind: SyntheticKind, n: usize, d: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("synthetic", "n and d must be at least 1"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid("noise", "must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };
    let inputs: Vec<f64> = (0..n * d).map(|_| normal()).collect();
    let row = |i: usize| &inputs[i * d..(i + 1) * d];
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (targets, true_weights) = match kind {
        SyntheticKind::Linear | SyntheticKind::Logistic => {
            let w: Vec<f64> = (0..=d).map(|_| normal()).collect();
            let t = (0..n)
                .map(|i| {
                    let z = dot(row(i), &w[..d]) + w[d] + noise * normal();
                    match kind {
                        SyntheticKind::Linear => z,
                        _ => f64::from(u8::from(z > 0.0)),
                    }
                })
                .collect();
            (t, Some(w))
        }
        SyntheticKind::MlpTeacher => {
            let w1: Vec<f64> = (0..TEACHER_HIDDEN * d).map(|_| normal() / (d as f64).sqrt()).collect();
            let w2: Vec<f64> = (0..TEACHER_CLASSES * TEACHER_HIDDEN).map(|_| normal() * 2.0).collect();
            let t = (0..n)
                .map(|i| {
                    let h: Vec<f64> = (0..TEACHER_HIDDEN).map(|j| dot(&w1[j * d..(j + 1) * d], row(i)).tanh()).collect();
                    let logits: Vec<f64> = (0..TEACHER_CLASSES)
                        .map(|c| dot(&w2[c * TEACHER_HIDDEN..(c + 1) * TEACHER_HIDDEN], &h) + noise * normal())
                        .collect();
                    let best = (0..TEACHER_CLASSES).max_by(|&a, &b| logits[a].total_cmp(&logits[b])).unwrap_or(0);
                    best as f64
                })
                .collect();
            (t, None)
        }
    };
    Ok(Dataset { inputs, n, d, targets, true_weights })
}
