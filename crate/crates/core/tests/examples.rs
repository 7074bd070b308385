//! Every example runs to completion.

#[path = "../examples/train_reference.rs"]
mod train_reference;
#[path = "../examples/gradient_check.rs"]
mod gradient_check;
#[path = "../examples/binarize_vs_oracle.rs"]
mod binarize_vs_oracle;
#[path = "../examples/quantize_levels.rs"]
mod quantize_levels;
#[path = "../examples/prune_vs_retrain.rs"]
mod prune_vs_retrain;
#[path = "../examples/low_rank.rs"]
mod low_rank;
#[path = "../examples/idc_cycling.rs"]
mod idc_cycling;
#[path = "../examples/clipped_schedule.rs"]
mod clipped_schedule;
#[path = "../examples/mlp_sgd.rs"]
mod mlp_sgd;
#[path = "../examples/file_formats.rs"]
mod file_formats;

#[test]
fn train_reference_runs() {
    train_reference::run_example().unwrap();
}

#[test]
fn gradient_check_runs() {
    gradient_check::run_example().unwrap();
}

#[test]
fn binarize_vs_oracle_runs() {
    binarize_vs_oracle::run_example().unwrap();
}

#[test]
fn quantize_levels_runs() {
    quantize_levels::run_example().unwrap();
}

#[test]
fn prune_vs_retrain_runs() {
    prune_vs_retrain::run_example().unwrap();
}

#[test]
fn low_rank_runs() {
    low_rank::run_example().unwrap();
}

#[test]
fn idc_cycling_runs() {
    idc_cycling::run_example().unwrap();
}

#[test]
fn clipped_schedule_runs() {
    clipped_schedule::run_example().unwrap();
}

#[test]
fn mlp_sgd_runs() {
    mlp_sgd::run_example().unwrap();
}

#[test]
fn file_formats_runs() {
    file_formats::run_example().unwrap();
}
