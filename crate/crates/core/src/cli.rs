//! The `lcc` command line.
//!
//! Exit status: 0 success, 1 converged with warnings, 2 not converged (all
//! outputs still written), 3 configuration error, 4 numeric error, 5 I/O or
//! parse error. Flags override configuration-file values, which override the
//! built-in defaults.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compress::{storage_cost, CompressedParams, CompressionScheme, SchemeKind};
use crate::error::{Error, Result};
use crate::io::config::SchemeSection;
use crate::io::metrics::{append_line, read_lines};
use crate::io::modelfile::write_file;
use crate::io::{append_metrics, load_config, load_model, load_theta, save_model, save_theta, RunConfig};
use crate::lc::{dc_run, idc_run, lc_run, retrain_after_prune, Method, MetricsRecord};
use crate::model::{dist, train_reference, LossTask, WeightVector};
use crate::oracle::{oracle_lowrank, oracle_quant, oracle_sign_loss, oracle_support_loss};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lcc", version, about = "Compress models with the learning-compression algorithm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the uncompressed reference model.
    TrainRef {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the LC algorithm from the reference model.
    Compress {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        lc: LcArgs,
    },
    /// Run a baseline: direct compression, iterated DC, or prune-and-retrain.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_enum)]
        kind: BaselineKind,
        /// iDC rounds (overrides `baseline.rounds`).
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Exhaustive ground-truth optimum for a small instance.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Loss and storage of a saved model.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Model file (defaults to `<out-dir>/lc.model`).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Compressed parameters for the storage count (defaults to the
        /// `.theta` file next to the model, if present).
        #[arg(long)]
        theta: Option<PathBuf>,
    },
    /// Summarize metrics files into a table and plot data.
    Report {
        /// Metrics files (`*.metrics.jsonl`).
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        /// Directory for `summary.tsv` and `plot_data.tsv`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Independent reference + LC runs over seeds and levels, in parallel.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        lc: LcArgs,
        /// Comma-separated seeds (default: the run seed).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Comma-separated levels (default: the configured level).
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Dc,
    Idc,
    Retrain,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Run seed (data, initialization, SGD, k-means).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    /// adaptive-quant, fixed-codebook, binarize, ternary, low-rank or prune-l0.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Compression level: K (adaptive-quant), r (low-rank) or kappa (prune-l0).
    #[arg(long)]
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct LcArgs {
    #[arg(long, value_parser = ["qp", "al"])]
    pub method: Option<String>,
    /// Initial penalty parameter.
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Multiplicative penalty growth per outer iteration (> 1).
    #[arg(long)]
    pub a: Option<f64>,
    /// Constraint-norm tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Keep the multipliers at zero under `--method al`.
    #[arg(long)]
    pub no_multiplier_updates: bool,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::TrainRef { common } => {
            let cfg = prepare(&common, None, None)?;
            cmd_train_ref(&cfg)
        }
        Command::Compress { common, scheme, lc } => {
            let cfg = prepare(&common, Some(&scheme), Some(&lc))?;
            cmd_compress(&cfg)
        }
        Command::Baseline { common, scheme, kind, rounds } => {
            let mut cfg = prepare(&common, Some(&scheme), None)?;
            if let Some(r) = rounds {
                cfg.baseline.rounds = r;
                cfg.validate()?;
            }
            cmd_baseline(&cfg, kind)
        }
        Command::Oracle { common, scheme } => {
            let cfg = prepare(&common, Some(&scheme), None)?;
            cmd_oracle(&cfg)
        }
        Command::Evaluate { common, model, theta } => {
            let cfg = prepare(&common, None, None)?;
            cmd_evaluate(&cfg, model, theta)
        }
        Command::Report { metrics, out_dir } => cmd_report(&metrics, &out_dir),
        Command::Sweep { common, mut scheme, lc, seeds, levels } => {
            // validation needs some level; every job then sets its own
            if scheme.level.is_none() {
                scheme.level = levels.first().copied();
            }
            let cfg = prepare(&common, Some(&scheme), Some(&lc))?;
            cmd_sweep(&cfg, &seeds, &levels)
        }
    }
}

/// Loads the configuration and applies flag overrides.
fn prepare(common: &CommonArgs, scheme: Option<&SchemeArgs>, lc: Option<&LcArgs>) -> Result<RunConfig> {
    let mut cfg = load_config(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &common.out_dir {
        cfg.output.dir = d.clone();
    }
    if let Some(sa) = scheme {
        if let Some(name) = &sa.scheme {
            let keep = cfg.scheme.as_ref().filter(|s| &s.kind == name).cloned();
            cfg.scheme = Some(keep.unwrap_or_else(|| SchemeSection::named(name)));
        }
        if let Some(level) = sa.level {
            cfg.scheme
                .as_mut()
                .ok_or_else(|| Error::config("--level given without a scheme"))?
                .set_level(level)?;
        }
    }
    if let Some(la) = lc {
        if let Some(m) = &la.method {
            cfg.lc.method = Method::parse(m)?;
        }
        if la.mu0.is_some() {
            cfg.lc.mu0 = la.mu0;
        }
        if let Some(a) = la.a {
            cfg.lc.a = a;
        }
        if la.tol.is_some() {
            cfg.lc.constraint_tol = la.tol;
        }
        if let Some(m) = la.max_outer {
            cfg.lc.max_outer = m;
        }
        if la.no_multiplier_updates {
            cfg.lc.multiplier_updates = false;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Warnings and notes go to stderr and to `<out-dir>/<name>.log`.
struct Log {
    path: PathBuf,
}

impl Log {
    fn create(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(format!("{name}.log"));
        write_file(&path, "")?;
        Ok(Log { path })
    }

    fn line(&self, level: &str, msg: &str) -> Result<()> {
        eprintln!("{level}: {msg}");
        let mut f = fs::OpenOptions::new().append(true).open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        writeln!(f, "{level}: {msg}").map_err(|e| Error::io(&self.path, e))
    }

    fn warn(&self, msg: &str) -> Result<()> {
        self.line("warning", msg)
    }

    fn info(&self, msg: &str) -> Result<()> {
        self.line("info", msg)
    }
}

fn fresh(path: &Path) -> Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(path, e)),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::numeric(e.to_string(), None))?;
    write_file(path, &(text + "\n"))
}

fn write_metrics(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    fresh(path)?;
    records.iter().try_for_each(|r| append_metrics(path, r))
}

fn load_reference(cfg: &RunConfig, task: &LossTask) -> Result<WeightVector> {
    let (w, family) = load_model(&cfg.reference_path())?;
    if family != task.family() {
        return Err(Error::config(format!(
            "reference model is {family}, configuration says {}",
            task.family()
        )));
    }
    task.check_weights(&w)?;
    Ok(w)
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainLine {
    iter: usize,
    loss: f64,
    grad_norm: f64,
}

pub fn cmd_train_ref(cfg: &RunConfig) -> Result<i32> {
    let dir = &cfg.output.dir;
    let log = Log::create(dir, "train-ref")?;
    let task = cfg.build_task()?;
    let init = task.init_weights(cfg.seed);
    let report = train_reference(&task, &init, &cfg.reference_options())?;
    save_model(&cfg.reference_path(), &report.w, task.family())?;
    let mpath = dir.join("reference.metrics.jsonl");
    fresh(&mpath)?;
    for r in &report.trace {
        append_line(&mpath, &TrainLine { iter: r.iter, loss: r.loss, grad_norm: r.grad_norm })?;
    }
    let loss = task.loss(&report.w)?;
    log.info(&format!("reference loss {loss:.6e} after {} iterations", report.iterations))?;
    if task.family().is_convex() && !report.converged {
        log.warn(&format!(
            "iteration cap {} reached with gradient norm {:.3e} above tolerance {:.1e}",
            cfg.reference.max_iters, report.grad_norm, cfg.reference.grad_tol
        ))?;
        return Ok(EXIT_WARNINGS);
    }
    Ok(EXIT_OK)
}

/// Per-run summary written next to the model, theta and metrics files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: String,
    pub scheme: String,
    pub level: Option<usize>,
    pub converged: bool,
    pub outer_iterations: usize,
    pub loss_reference: f64,
    pub loss_dc: f64,
    pub loss_compressed: f64,
    pub constraint_norm: f64,
    pub storage_bits: u64,
    pub warnings: Vec<String>,
}

fn bits(theta: &CompressedParams) -> Result<u64> {
    Ok(storage_cost(theta, 32)?.total_bits)
}

pub fn cmd_compress(cfg: &RunConfig) -> Result<i32> {
    let dir = &cfg.output.dir;
    let log = Log::create(dir, "compress")?;
    let task = cfg.build_task()?;
    let w_ref = load_reference(cfg, &task)?;
    let scheme = cfg.scheme()?;
    let lc = cfg.lc_config()?;
    let out = lc_run(&task, &scheme, &lc, &w_ref)?;
    save_theta(&dir.join("lc.theta"), &out.state.theta)?;
    save_model(&dir.join("lc.model"), &out.compressed, task.family())?;
    write_metrics(&dir.join("lc.metrics.jsonl"), &out.state.history)?;
    let dc = dc_run(&task, &scheme, &w_ref)?;
    let summary = RunSummary {
        run: "lc".into(),
        scheme: scheme.kind.name().into(),
        level: scheme.kind.level(),
        converged: out.converged,
        outer_iterations: out.state.k,
        loss_reference: task.loss(&w_ref)?,
        loss_dc: task.loss(&dc.compressed)?,
        loss_compressed: task.loss(&out.compressed)?,
        constraint_norm: out.state.history.last().map_or(0.0, |r| r.constraint_norm),
        storage_bits: bits(&out.state.theta)?,
        warnings: out.warnings.clone(),
    };
    write_json(&dir.join("lc.summary.json"), &summary)?;
    log.info(&format!(
        "mu0 {:.3e}, tolerance {:.3e}, {} outer iterations, loss {:.6e} (direct compression {:.6e})",
        out.mu0, out.constraint_tol, out.state.k, summary.loss_compressed, summary.loss_dc
    ))?;
    for w in &out.warnings {
        log.warn(w)?;
    }
    if !out.converged {
        log.warn(&format!(
            "not converged after {} outer iterations: constraint norm {:.3e} >= {:.3e}",
            out.state.k, summary.constraint_norm, out.constraint_tol
        ))?;
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(if out.warnings.is_empty() { EXIT_OK } else { EXIT_WARNINGS })
}

fn single_record(task: &LossTask, w: &WeightVector, compressed: &WeightVector, indices: &[usize]) -> Result<MetricsRecord> {
    Ok(MetricsRecord {
        k: 0,
        mu: 0.0,
        loss_w: task.loss(w)?,
        loss_compressed: task.loss(compressed)?,
        constraint_norm: dist(&w.gather(indices), &compressed.gather(indices)),
        lambda_norm: 0.0,
        lstep_iters_used: 0,
        wallclock_ms: 0.0,
    })
}

pub fn cmd_baseline(cfg: &RunConfig, kind: BaselineKind) -> Result<i32> {
    let dir = &cfg.output.dir;
    let name = match kind {
        BaselineKind::Dc => "dc",
        BaselineKind::Idc => "idc",
        BaselineKind::Retrain => "retrain",
    };
    let scheme = match kind {
        BaselineKind::Retrain => match cfg.scheme()? {
            s @ CompressionScheme { kind: SchemeKind::PruneL0 { .. }, .. } => s,
            other => {
                return Err(Error::config(format!("retrain baseline needs prune-l0, got {}", other.kind.name())))
            }
        },
        _ => cfg.scheme()?,
    };
    let log = Log::create(dir, &format!("baseline-{name}"))?;
    let task = cfg.build_task()?;
    let w_ref = load_reference(cfg, &task)?;
    let comp = scheme.resolve(&w_ref)?;
    let loss_dc;
    let (theta, compressed, records, warnings) = match kind {
        BaselineKind::Dc => {
            let dc = dc_run(&task, &scheme, &w_ref)?;
            loss_dc = task.loss(&dc.compressed)?;
            let rec = single_record(&task, &w_ref, &dc.compressed, comp.indices())?;
            (dc.theta, dc.compressed, vec![rec], Vec::new())
        }
        BaselineKind::Idc => {
            let h = idc_run(&task, &scheme, &w_ref, cfg.baseline.rounds, &cfg.trainer())?;
            loss_dc = task.loss(&h.dc.compressed)?;
            let rpath = dir.join("idc.rounds.jsonl");
            fresh(&rpath)?;
            for r in &h.rounds {
                append_line(&rpath, r)?;
            }
            let records = h
                .rounds
                .iter()
                .map(|r| MetricsRecord {
                    k: r.round,
                    mu: 0.0,
                    loss_w: r.loss_w,
                    loss_compressed: r.loss_compressed,
                    constraint_norm: r.constraint_norm,
                    lambda_norm: 0.0,
                    lstep_iters_used: 0,
                    wallclock_ms: 0.0,
                })
                .collect();
            let mut warnings = Vec::new();
            if let Some(r) = h.cycle_detected_at {
                warnings.push(format!(
                    "round {r} revisited round {} state: iterated direct compression is cycling",
                    h.rounds[r - 1].repeats_round.unwrap_or(0)
                ));
            }
            (h.theta, h.compressed, records, warnings)
        }
        BaselineKind::Retrain => {
            let SchemeKind::PruneL0 { kappa } = scheme.kind else { unreachable!() };
            let w = retrain_after_prune(&task, &w_ref, kappa, &cfg.trainer())?;
            loss_dc = task.loss(&dc_run(&task, &scheme, &w_ref)?.compressed)?;
            let theta = comp.project(&w)?;
            let compressed = comp.decompress(&theta, &w)?;
            let rec = single_record(&task, &w, &compressed, comp.indices())?;
            (theta, compressed, vec![rec], Vec::new())
        }
    };
    save_theta(&dir.join(format!("{name}.theta")), &theta)?;
    save_model(&dir.join(format!("{name}.model")), &compressed, task.family())?;
    write_metrics(&dir.join(format!("{name}.metrics.jsonl")), &records)?;
    let last = records.last().expect("at least one record");
    let summary = RunSummary {
        run: name.into(),
        scheme: scheme.kind.name().into(),
        level: scheme.kind.level(),
        converged: true,
        outer_iterations: records.len(),
        loss_reference: task.loss(&w_ref)?,
        loss_dc,
        loss_compressed: last.loss_compressed,
        constraint_norm: last.constraint_norm,
        storage_bits: bits(&theta)?,
        warnings: warnings.clone(),
    };
    write_json(&dir.join(format!("{name}.summary.json")), &summary)?;
    log.info(&format!("{name}: loss {:.6e}", summary.loss_compressed))?;
    for w in &warnings {
        log.info(w)?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub scheme: String,
    pub level: Option<usize>,
    /// `loss` for sign/support oracles, `distortion` for quantization and
    /// low-rank.
    pub objective: String,
    pub value: f64,
    /// Optimal decompressed constrained weights (absent for low-rank).
    pub decompressed: Option<Vec<f64>>,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<i32> {
    let dir = &cfg.output.dir;
    let task = cfg.build_task()?;
    let w_ref = load_reference(cfg, &task)?;
    let scheme = cfg.scheme()?;
    let comp = scheme.resolve(&w_ref)?;
    let (objective, sol) = match &scheme.kind {
        SchemeKind::Binarize => ("loss", oracle_sign_loss(&task, &w_ref)?),
        SchemeKind::PruneL0 { kappa } => ("loss", oracle_support_loss(&task, &w_ref, *kappa)?),
        SchemeKind::AdaptiveQuant { k } => ("distortion", oracle_quant(&comp.gather(&w_ref), *k)?),
        SchemeKind::LowRank { rank, layer } => {
            let (range, l) = w_ref.layer_range(layer).expect("resolved layer");
            let crate::model::LayerKind::Matrix { rows: m, cols: n } = l.kind else {
                unreachable!("low-rank resolves to a matrix layer")
            };
            let value = oracle_lowrank(&w_ref.values()[range], m, n, *rank)?;
            let report = OracleReport {
                scheme: scheme.kind.name().into(),
                level: Some(*rank),
                objective: "distortion".into(),
                value,
                decompressed: None,
            };
            write_json(&dir.join("oracle.json"), &report)?;
            return Ok(EXIT_OK);
        }
        other => return Err(Error::config(format!("no exhaustive oracle for {}", other.name()))),
    };
    save_theta(&dir.join("oracle.theta"), &sol.theta)?;
    let report = OracleReport {
        scheme: scheme.kind.name().into(),
        level: scheme.kind.level(),
        objective: objective.into(),
        value: sol.value,
        decompressed: Some(sol.theta.decompressed()),
    };
    write_json(&dir.join("oracle.json"), &report)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Evaluation {
    model: PathBuf,
    loss: f64,
    parameters: usize,
    storage_bits: Option<u64>,
}

pub fn cmd_evaluate(cfg: &RunConfig, model: Option<PathBuf>, theta: Option<PathBuf>) -> Result<i32> {
    let task = cfg.build_task()?;
    let path = model.unwrap_or_else(|| cfg.output.dir.join("lc.model"));
    let (w, _) = load_model(&path)?;
    task.check_weights(&w)?;
    let theta_path = theta.or_else(|| Some(path.with_extension("theta")).filter(|p| p.exists()));
    let storage_bits = match theta_path {
        Some(p) => Some(bits(&load_theta(&p)?)?),
        None => None,
    };
    let eval = Evaluation { model: path, loss: task.loss(&w)?, parameters: w.len(), storage_bits };
    let text = serde_json::to_string_pretty(&eval).map_err(|e| Error::numeric(e.to_string(), None))?;
    println!("{text}");
    write_file(&cfg.output.dir.join("evaluate.json"), &(text + "\n"))?;
    Ok(EXIT_OK)
}

/// Row of the `report` summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run: String,
    pub records: usize,
    pub final_k: usize,
    pub final_mu: f64,
    pub loss_w: f64,
    pub loss_compressed: f64,
    pub constraint_norm: f64,
    pub level: Option<usize>,
    pub storage_bits: Option<u64>,
    pub oracle_gap: Option<f64>,
}

fn run_name(path: &Path) -> String {
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("run");
    let stem = file.strip_suffix(".metrics.jsonl").or_else(|| file.strip_suffix(".jsonl")).unwrap_or(file);
    match path.parent().and_then(|p| p.file_name()).and_then(|p| p.to_str()) {
        Some(parent) => format!("{parent}/{stem}"),
        None => stem.to_string(),
    }
}

pub fn cmd_report(paths: &[PathBuf], out_dir: &Path) -> Result<i32> {
    let mut rows = Vec::new();
    let mut plot = String::from("run\tk\tmu\tloss_w\tloss_compressed\tconstraint_norm\tlambda_norm\n");
    for p in paths {
        let records: Vec<MetricsRecord> = read_lines(p)?;
        let name = run_name(p);
        for r in &records {
            let _ = writeln!(
                plot,
                "{name}\t{}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}",
                r.k, r.mu, r.loss_w, r.loss_compressed, r.constraint_norm, r.lambda_norm
            );
        }
        let last = records.last().expect("nonempty");
        let dir = p.parent().unwrap_or(Path::new("."));
        let prefix = p.file_name().and_then(|f| f.to_str()).and_then(|f| f.strip_suffix(".metrics.jsonl"));
        let summary: Option<RunSummary> = prefix
            .map(|s| dir.join(format!("{s}.summary.json")))
            .filter(|s| s.exists())
            .and_then(|s| fs::read_to_string(s).ok())
            .and_then(|t| serde_json::from_str(&t).ok());
        let oracle: Option<OracleReport> = fs::read_to_string(dir.join("oracle.json"))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .filter(|o: &OracleReport| o.objective == "loss");
        rows.push(ReportRow {
            run: name,
            records: records.len(),
            final_k: last.k,
            final_mu: last.mu,
            loss_w: last.loss_w,
            loss_compressed: last.loss_compressed,
            constraint_norm: last.constraint_norm,
            level: summary.as_ref().and_then(|s| s.level),
            storage_bits: summary.as_ref().map(|s| s.storage_bits),
            oracle_gap: oracle.map(|o| (last.loss_compressed - o.value) / o.value.abs().max(f64::MIN_POSITIVE)),
        });
    }
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    let mut table = String::from(
        "run\trecords\tfinal_k\tfinal_mu\tloss_w\tloss_compressed\tconstraint_norm\tlevel\tstorage_bits\toracle_gap\n",
    );
    for r in &rows {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{:e}\t{:e}\t{:e}\t{:e}\t{}\t{}\t{}",
            r.run,
            r.records,
            r.final_k,
            r.final_mu,
            r.loss_w,
            r.loss_compressed,
            r.constraint_norm,
            opt(r.level.map(|l| l.to_string())),
            opt(r.storage_bits.map(|b| b.to_string())),
            opt(r.oracle_gap.map(|g| format!("{g:e}"))),
        );
    }
    write_file(&out_dir.join("summary.tsv"), &table)?;
    write_file(&out_dir.join("plot_data.tsv"), &plot)?;
    print!("{table}");
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    seed: u64,
    level: Option<usize>,
    exit: i32,
    loss_dc: f64,
    loss_compressed: f64,
    storage_bits: u64,
}

pub fn cmd_sweep(cfg: &RunConfig, seeds: &[u64], levels: &[usize]) -> Result<i32> {
    let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds.to_vec() };
    let level_opts: Vec<Option<usize>> =
        if levels.is_empty() { vec![None] } else { levels.iter().map(|&l| Some(l)).collect() };
    let mut jobs = Vec::new();
    for &seed in &seeds {
        for &level in &level_opts {
            let mut c = cfg.clone();
            c.seed = seed;
            if let Some(l) = level {
                c.scheme.as_mut().ok_or_else(|| Error::config("--levels given without a scheme"))?.set_level(l)?;
            }
            let tag = match level {
                Some(l) => format!("seed{seed}-level{l}"),
                None => format!("seed{seed}"),
            };
            let dir = cfg.output.dir.join("sweep").join(tag);
            c.output.dir = dir.clone();
            c.output.reference = Some(dir.join("reference.model"));
            c.validate()?;
            jobs.push((seed, level, c));
        }
    }
    let results: Vec<Result<SweepRow>> = jobs
        .par_iter()
        .map(|(seed, level, c)| {
            cmd_train_ref(c)?;
            let exit = cmd_compress(c)?;
            let s: RunSummary = serde_json::from_str(
                &fs::read_to_string(c.output.dir.join("lc.summary.json")).map_err(|e| Error::io(&c.output.dir, e))?,
            )
            .map_err(|e| Error::numeric(e.to_string(), None))?;
            Ok(SweepRow {
                seed: *seed,
                level: *level,
                exit,
                loss_dc: s.loss_dc,
                loss_compressed: s.loss_compressed,
                storage_bits: s.storage_bits,
            })
        })
        .collect();
    let mut table = String::from("seed\tlevel\texit\tloss_dc\tloss_compressed\tstorage_bits\n");
    let mut worst = EXIT_OK;
    for r in results {
        let r = r?;
        worst = worst.max(r.exit);
        let level = r.level.map_or("-".to_string(), |l| l.to_string());
        let _ = writeln!(table, "{}\t{level}\t{}\t{:e}\t{:e}\t{}", r.seed, r.exit, r.loss_dc, r.loss_compressed, r.storage_bits);
    }
    write_file(&cfg.output.dir.join("sweep.tsv"), &table)?;
    print!("{table}");
    Ok(worst)
}
