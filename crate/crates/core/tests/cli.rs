use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lc_compress::io::{load_model, load_theta, read_metrics};
use lc_compress::CompressedParams;

fn lcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcc")).args(args).output().expect("run lcc")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.toml"), config).unwrap();
        Fixture { dir }
    }

    fn config(&self) -> String {
        self.dir.path().join("run.toml").to_str().unwrap().to_string()
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn with_reference(config: &str) -> Self {
        let f = Self::new(config);
        let out = f.run(&["train-ref"], &[]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        f
    }

    fn run(&self, cmd: &[&str], extra: &[&str]) -> Output {
        let cfg = self.config();
        let out = self.out();
        let mut args: Vec<&str> = cmd.to_vec();
        args.extend(["--config", &cfg, "--out-dir", out.to_str().unwrap()]);
        args.extend(extra);
        lcc(&args)
    }
}

const SIGN: &str = "seed = 3\n[task]\nfamily = \"least-squares\"\n[data]\nn = 50\nd = 8\nnoise = 0.5\n[scheme]\nkind = \"binarize\"\n";

const PRUNE: &str = "seed = 4\n[task]\nfamily = \"least-squares\"\n[data]\nn = 50\nd = 10\nnoise = 0.5\n[scheme]\nkind = \"prune-l0\"\nkappa = 3\n";

#[test]
fn help_lists_subcommands_and_flags() {
    let out = lcc(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["train-ref", "compress", "baseline", "oracle", "evaluate", "report", "sweep"] {
        assert!(text.contains(cmd), "missing {cmd}");
    }
    let out = lcc(&["compress", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--method", "--scheme", "--level", "--mu0", "--a", "--tol", "--max-outer", "--seed", "--config"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&lcc(&["compress", "--bogus"])), 3);
    assert_eq!(code(&lcc(&[])), 3);
}

#[test]
fn missing_config_is_an_io_error() {
    assert_eq!(code(&lcc(&["compress", "--config", "/nonexistent/run.toml"])), 5);
}

#[test]
fn bad_growth_factor_is_rejected() {
    let f = Fixture::new(SIGN);
    let out = f.run(&["compress"], &["--a", "0.5"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains('a'));
}

#[test]
fn config_errors_name_field_and_line() {
    let f = Fixture::new("seed = 1\n[task]\nfamily = \"least-squares\"\n[data]\nn = 20\n[lc]\na = 0.9\n");
    let out = f.run(&["compress"], &[]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lc.a") && err.contains("line 7"), "{err}");
}

#[test]
fn compress_binarize_gives_feasible_model() {
    let f = Fixture::with_reference(SIGN);
    let out = f.run(&["compress"], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (model, _) = load_model(&f.out().join("lc.model")).unwrap();
    let masked = model.masked_indices();
    assert_eq!(masked.len(), 8);
    assert!(masked.iter().all(|&i| model.values()[i].abs() == 1.0));
    assert!(matches!(load_theta(&f.out().join("lc.theta")).unwrap(), CompressedParams::Sign { .. }));
    let records = read_metrics(&f.out().join("lc.metrics.jsonl")).unwrap();
    assert!(records.last().unwrap().constraint_norm < 1e-5);
    assert!(f.out().join("lc.summary.json").exists());
}

#[test]
fn flags_override_the_file() {
    let f = Fixture::with_reference(SIGN);
    let out = f.run(&["compress"], &["--scheme", "adaptive-quant", "--level", "2", "--method", "qp"]);
    assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
    match load_theta(&f.out().join("lc.theta")).unwrap() {
        CompressedParams::Quant { codebook, .. } => assert_eq!(codebook.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn not_converged_exits_2() {
    let f = Fixture::with_reference(SIGN);
    assert_eq!(code(&f.run(&["compress"], &["--max-outer", "2"])), 2);
}

#[test]
fn aggressive_growth_warns() {
    let f = Fixture::with_reference(SIGN);
    let out = f.run(&["compress"], &["--a", "10"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("warn"));
}

#[test]
fn baselines_and_oracle_write_artifacts() {
    let f = Fixture::with_reference(PRUNE);
    for kind in ["dc", "idc", "retrain"] {
        let out = f.run(&["baseline"], &["--kind", kind]);
        assert_eq!(code(&out), 0, "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(f.out().join(format!("{kind}.theta")).exists());
        assert!(f.out().join(format!("{kind}.model")).exists());
    }
    assert!(f.out().join("idc.rounds.jsonl").exists());
    let out = f.run(&["oracle"], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f.out().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(report["objective"], "loss");
}

#[test]
fn retrain_requires_pruning() {
    let f = Fixture::new(SIGN);
    assert_eq!(code(&f.run(&["baseline"], &["--kind", "retrain"])), 3);
}

#[test]
fn evaluate_and_report() {
    let f = Fixture::with_reference(SIGN);
    assert_eq!(code(&f.run(&["compress"], &[])), 0);
    let model = f.out().join("lc.model");
    let theta = f.out().join("lc.theta");
    let out = f.run(&["evaluate"], &["--model", model.to_str().unwrap(), "--theta", theta.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(f.out().join("evaluate.json").exists());

    let metrics = f.out().join("lc.metrics.jsonl");
    let report_dir = f.dir.path().join("report");
    let out = lcc(&["report", metrics.to_str().unwrap(), "--out-dir", report_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(report_dir.join("summary.tsv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.starts_with("run\t"));
}

#[test]
fn report_rejects_empty_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&lcc(&["report", empty.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])), 5);
}

#[test]
fn sweep_levels_apply_to_a_scheme_given_by_flag() {
    let f = Fixture::new(SIGN);
    let out = f.run(&["sweep"], &["--scheme", "adaptive-quant", "--seeds", "1", "--levels", "2,3"]);
    assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(f.out().join("sweep.tsv")).unwrap().lines().count(), 3);
}

#[test]
fn sweep_covers_the_grid() {
    let f = Fixture::new("seed = 1\n[task]\nfamily = \"least-squares\"\n[data]\nn = 40\nd = 6\n[scheme]\nkind = \"adaptive-quant\"\nk = 2\n");
    let out = f.run(&["sweep"], &["--seeds", "1,2", "--levels", "1,2,3"]);
    assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(f.out().join("sweep.tsv")).unwrap();
    assert_eq!(table.lines().count(), 7);
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    std::fs::read(dir.join(file)).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let a = Fixture::new(SIGN);
    let b = Fixture::new(SIGN);
    for f in [&a, &b] {
        assert_eq!(code(&f.run(&["train-ref"], &[])), 0);
        assert_eq!(code(&f.run(&["compress"], &[])), 0);
    }
    for file in ["reference.model", "lc.model", "lc.theta"] {
        assert_eq!(read(&a.out(), file), read(&b.out(), file), "{file}");
    }
    let strip = |p: &Path| {
        read_metrics(p).unwrap().into_iter().map(|r| lc_compress::lc::MetricsRecord { wallclock_ms: 0.0, ..r }).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a.out().join("lc.metrics.jsonl")), strip(&b.out().join("lc.metrics.jsonl")));
}
