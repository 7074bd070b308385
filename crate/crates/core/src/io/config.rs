//! Run configuration: TOML sections of `key = value` pairs.
//!
//! ```toml
//! seed = 7
//!
//! [task]
//! family = "least-squares"      # least-squares | logistic | mlp-xent
//! l2_reg = 0.0
//! weight_shape = [4, 4]         # optional matrix view of linear weights
//!
//! [data]
//! synthetic = "linear"          # or: path = "train.csv", target_column = "y"
//! n = 100
//! d = 16
//! noise = 0.1
//!
//! [scheme]
//! kind = "adaptive-quant"       # adaptive-quant | fixed-codebook | binarize
//! k = 4                         # | ternary | low-rank | prune-l0
//!
//! [lc]
//! method = "al"
//! a = 1.4
//! ```
//!
//! Unknown keys and duplicate keys are rejected. Relative paths are resolved
//! against the directory holding the configuration file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::dataset::{gen_synthetic, load_csv, Dataset, SyntheticKind};
use super::modelfile::read_file;
use crate::compress::{CompressionScheme, SchemeKind, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::lc::{
    LStepSolver, LcConfig, Method, Trainer, DEFAULT_A, DEFAULT_INNER_ITERS, DEFAULT_MAX_OUTER, DEFAULT_SGD_EPOCHS,
};
use crate::model::{LossFamily, LossTask, ReferenceOptions, LINEAR_WEIGHTS};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub task: TaskSection,
    pub data: DataSection,
    #[serde(default)]
    pub scheme: Option<SchemeSection>,
    #[serde(default)]
    pub lc: LcSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub family: LossFamily,
    #[serde(default = "default_hidden")]
    pub mlp_hidden: usize,
    #[serde(default)]
    pub l2_reg: f64,
    #[serde(default)]
    pub weight_shape: Option<[usize; 2]>,
}

fn default_hidden() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file with a header row.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Header name or 0-based index; defaults to the last column.
    #[serde(default)]
    pub target_column: Option<String>,
    /// Synthetic generator used when no `path` is given; defaults to the one
    /// matching the task family.
    #[serde(default)]
    pub synthetic: Option<SyntheticKind>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Data seed; the run seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_n() -> usize {
    100
}
fn default_d() -> usize {
    8
}
fn default_noise() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub codebook: Option<Vec<f64>>,
    #[serde(default)]
    pub rank: Option<usize>,
    /// Target layer for low-rank; the linear weight matrix by default.
    #[serde(default)]
    pub layer: Option<String>,
    #[serde(default)]
    pub kappa: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SchemeSection {
    pub fn named(kind: &str) -> Self {
        SchemeSection {
            kind: kind.to_string(),
            k: None,
            codebook: None,
            rank: None,
            layer: None,
            kappa: None,
            restarts: None,
            seed: None,
        }
    }

    /// Sets the scheme's level: `K`, `r` or `κ`.
    pub fn set_level(&mut self, level: usize) -> Result<()> {
        match canonical_kind(&self.kind)? {
            "adaptive-quant" => self.k = Some(level),
            "low-rank" => self.rank = Some(level),
            "prune-l0" => self.kappa = Some(level),
            other => return Err(Error::invalid("level", format!("scheme {other} has no level"))),
        }
        Ok(())
    }

    pub fn build(&self, run_seed: u64) -> Result<CompressionScheme> {
        let need = |v: Option<usize>, field: &str| v.ok_or_else(|| Error::invalid(format!("scheme.{field}"), "required for this scheme"));
        let kind = match canonical_kind(&self.kind)? {
            "adaptive-quant" => SchemeKind::AdaptiveQuant { k: need(self.k, "k")? },
            "fixed-codebook" => SchemeKind::FixedCodebook {
                codebook: self.codebook.clone().ok_or_else(|| Error::invalid("scheme.codebook", "required for fixed-codebook"))?,
            },
            "binarize" => SchemeKind::Binarize,
            "ternary" => SchemeKind::Ternary,
            "low-rank" => SchemeKind::LowRank {
                rank: need(self.rank, "rank")?,
                layer: self.layer.clone().unwrap_or_else(|| LINEAR_WEIGHTS.to_string()),
            },
            "prune-l0" => SchemeKind::PruneL0 { kappa: need(self.kappa, "kappa")? },
            _ => unreachable!("canonical names only"),
        };
        Ok(CompressionScheme::new(kind)
            .with_restarts(self.restarts.unwrap_or(DEFAULT_RESTARTS))
            .with_seed(self.seed.unwrap_or(run_seed)))
    }
}

fn canonical_kind(kind: &str) -> Result<&'static str> {
    Ok(match kind {
        "adaptive-quant" | "quant" => "adaptive-quant",
        "fixed-codebook" => "fixed-codebook",
        "binarize" => "binarize",
        "ternary" => "ternary",
        "low-rank" => "low-rank",
        "prune-l0" | "prune" => "prune-l0",
        other => return Err(Error::invalid("scheme.kind", format!("unknown scheme `{other}`"))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LStepKind {
    Gd,
    Sgd,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LcSection {
    pub method: Method,
    pub mu0: Option<f64>,
    pub a: f64,
    pub max_outer: usize,
    pub constraint_tol: Option<f64>,
    /// `gd` for the convex families and `sgd` for the MLP when absent.
    pub lstep: Option<LStepKind>,
    pub inner_iters: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub multiplier_updates: bool,
    pub steps_per_mu: usize,
}

impl Default for LcSection {
    fn default() -> Self {
        LcSection {
            method: Method::Al,
            mu0: None,
            a: DEFAULT_A,
            max_outer: DEFAULT_MAX_OUTER,
            constraint_tol: None,
            lstep: None,
            inner_iters: DEFAULT_INNER_ITERS,
            alpha: 0.5,
            beta: 100.0,
            epochs: DEFAULT_SGD_EPOCHS,
            batch_size: 16,
            multiplier_updates: true,
            steps_per_mu: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        let d = ReferenceOptions::default();
        ReferenceSection {
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            alpha: d.alpha,
            beta: d.beta,
            epochs: d.epochs,
            batch_size: d.batch_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    /// iDC rounds.
    pub rounds: usize,
    /// Retraining solver; per-family default when absent.
    pub trainer: Option<LStepKind>,
    /// GD iterations for `trainer = "gd"`.
    pub iters: usize,
    /// SGD epochs for `trainer = "sgd"` (schedule and batch from `[lc]`).
    pub epochs: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection { rounds: 5, trainer: None, iters: 2000, epochs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Reference model read by `compress`, `baseline` and `oracle`;
    /// `<dir>/reference.model` when absent.
    pub reference: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), reference: None }
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = read_file(path)?;
    let mut cfg = parse_config(&text).map_err(|e| with_location(e, &text, path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    cfg.resolve_paths(base);
    Ok(cfg)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
        let message = e.message().to_string();
        match line {
            Some(l) => Error::config(format!("line {l}: {message}")),
            None => Error::config(message),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Appends the file name and the offending line to validation errors.
fn with_location(e: Error, text: &str, path: &Path) -> Error {
    match e {
        Error::Invalid { field, message } => {
            let loc = locate(text, &field).map_or(String::new(), |l| format!(" (line {l})"));
            Error::Invalid { field, message: format!("{message}; in {}{loc}", path.display()) }
        }
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// 1-based line assigning the dotted `field` (`section.key` or `key`).
fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key) = field.rsplit_once('.').unwrap_or(("", field));
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = h.trim().to_string();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    /// Checks every numeric constraint, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let t = &self.task;
        if !(t.l2_reg >= 0.0 && t.l2_reg.is_finite()) {
            return Err(Error::invalid("task.l2_reg", "must be nonnegative"));
        }
        if t.mlp_hidden == 0 {
            return Err(Error::invalid("task.mlp_hidden", "must be positive"));
        }
        let d = &self.data;
        if d.path.is_none() && (d.n == 0 || d.d == 0) {
            return Err(Error::invalid(if d.n == 0 { "data.n" } else { "data.d" }, "must be positive"));
        }
        if !(d.noise >= 0.0 && d.noise.is_finite()) {
            return Err(Error::invalid("data.noise", "must be nonnegative"));
        }
        if let Some(s) = &self.scheme {
            s.build(self.seed).map_err(|e| match e {
                Error::Invalid { field, message } if !field.starts_with("scheme.") => {
                    Error::Invalid { field: format!("scheme.{field}"), message }
                }
                other => other,
            })?;
        }
        self.lc_config().map_err(|e| match e {
            Error::Invalid { field, message } => Error::Invalid { field: format!("lc.{field}"), message },
            other => other,
        })?;
        let r = &self.reference;
        if !(r.grad_tol > 0.0) {
            return Err(Error::invalid("reference.grad_tol", "must be positive"));
        }
        if !(r.alpha > 0.0 && r.beta > 0.0) {
            return Err(Error::invalid(if r.alpha > 0.0 { "reference.beta" } else { "reference.alpha" }, "must be positive"));
        }
        if r.batch_size == 0 {
            return Err(Error::invalid("reference.batch_size", "must be positive"));
        }
        if self.baseline.rounds == 0 {
            return Err(Error::invalid("baseline.rounds", "must be at least 1"));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.data.path.as_mut() {
            fix(p);
        }
        fix(&mut self.output.dir);
        if let Some(p) = self.output.reference.as_mut() {
            fix(p);
        }
    }

    pub fn lstep_kind(&self) -> LStepKind {
        self.lc.lstep.unwrap_or(match self.task.family {
            LossFamily::MlpXent => LStepKind::Sgd,
            _ => LStepKind::Gd,
        })
    }

    pub fn lc_config(&self) -> Result<LcConfig> {
        let l = &self.lc;
        let lstep = match self.lstep_kind() {
            LStepKind::Gd => LStepSolver::FixedStepGd { inner_iters: l.inner_iters },
            LStepKind::Sgd => LStepSolver::Sgd { alpha: l.alpha, beta: l.beta, epochs: l.epochs, batch_size: l.batch_size },
            LStepKind::Exact => LStepSolver::Exact,
        };
        let cfg = LcConfig {
            method: l.method,
            mu0: l.mu0,
            a: l.a,
            max_outer: l.max_outer,
            constraint_tol: l.constraint_tol,
            lstep,
            multiplier_updates: l.multiplier_updates,
            steps_per_mu: l.steps_per_mu,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scheme(&self) -> Result<CompressionScheme> {
        self.scheme
            .as_ref()
            .ok_or_else(|| Error::config("no [scheme] section and no --scheme flag"))?
            .build(self.seed)
    }

    pub fn reference_options(&self) -> ReferenceOptions {
        let r = &self.reference;
        ReferenceOptions {
            max_iters: r.max_iters,
            grad_tol: r.grad_tol,
            alpha: r.alpha,
            beta: r.beta,
            epochs: r.epochs,
            batch_size: r.batch_size,
            seed: self.seed,
        }
    }

    pub fn trainer(&self) -> Trainer {
        let b = &self.baseline;
        match b.trainer {
            None => match self.task.family {
                LossFamily::LeastSquares => Trainer::Exact,
                LossFamily::Logistic => Trainer::Gd { iters: b.iters },
                LossFamily::MlpXent => self.sgd_trainer(),
            },
            Some(LStepKind::Exact) => Trainer::Exact,
            Some(LStepKind::Gd) => Trainer::Gd { iters: b.iters },
            Some(LStepKind::Sgd) => self.sgd_trainer(),
        }
    }

    fn sgd_trainer(&self) -> Trainer {
        Trainer::Sgd {
            alpha: self.lc.alpha,
            beta: self.lc.beta,
            epochs: self.baseline.epochs,
            batch_size: self.lc.batch_size,
            seed: self.seed,
        }
    }

    pub fn dataset(&self) -> Result<Dataset> {
        match &self.data.path {
            Some(p) => {
                let target = match &self.data.target_column {
                    Some(t) => t.clone(),
                    None => last_column(p)?,
                };
                load_csv(p, &target)
            }
            None => {
                let kind = self.data.synthetic.unwrap_or(SyntheticKind::for_family(self.task.family));
                gen_synthetic(kind, self.data.n, self.data.d, self.data.noise, self.data.seed.unwrap_or(self.seed))
            }
        }
    }

    /// Loads or generates the data and builds the loss task.
    pub fn build_task(&self) -> Result<LossTask> {
        let ds = self.dataset()?;
        let mut task = ds.to_task(self.task.family)?.with_l2(self.task.l2_reg)?;
        if self.task.family == LossFamily::MlpXent {
            task = task.with_hidden(self.task.mlp_hidden)?;
        }
        if let Some([r, c]) = self.task.weight_shape {
            task = task.with_weight_shape(r, c)?;
        }
        Ok(task)
    }

    pub fn reference_path(&self) -> PathBuf {
        self.output.reference.clone().unwrap_or_else(|| self.output.dir.join("reference.model"))
    }
}

fn last_column(path: &Path) -> Result<String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse { path: path.to_path_buf(), line: 1, message: format!("{other:?}") },
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { path: path.to_path_buf(), line: 1, message: e.to_string() })?;
    Ok(headers.len().saturating_sub(1).to_string())
}
