//! Writing and reading model, parameter and metrics files.

use lc_compress::io::modelfile::{model_to_string, theta_to_string};
use lc_compress::io::{append_metrics, gen_synthetic, load_model, load_theta, read_metrics, save_model, save_theta, SyntheticKind};
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 40, 4, 0.2, 4)?.to_task(LossFamily::LeastSquares)?;
    let w = task.init_weights(4);
    let out = lc_run(&task, &CompressionScheme::adaptive_quant(2), &LcConfig::default(), &w)?;

    let dir = std::env::temp_dir().join(format!("lc-formats-{}", std::process::id()));
    let (model, theta, metrics) = (dir.join("lc.model"), dir.join("lc.theta"), dir.join("lc.metrics.jsonl"));
    save_model(&model, &out.compressed, LossFamily::LeastSquares)?;
    save_theta(&theta, &out.state.theta)?;
    for r in &out.state.history {
        append_metrics(&metrics, r)?;
    }

    print!("{}", model_to_string(&out.compressed, LossFamily::LeastSquares));
    print!("{}", theta_to_string(&out.state.theta));
    let (back, _) = load_model(&model)?;
    assert_eq!(back.values(), out.compressed.values());
    assert_eq!(load_theta(&theta)?, out.state.theta);
    println!("{} metrics records read back", read_metrics(&metrics)?.len());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
