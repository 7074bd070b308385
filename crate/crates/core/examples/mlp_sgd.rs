//! Binarizing a small MLP with SGD L steps.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::{dc_run, LStepSolver};
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::MlpTeacher, 120, 3, 0.1, 2)?
        .to_task(LossFamily::MlpXent)?
        .with_hidden(6)?;
    let opts = ReferenceOptions { epochs: 50, seed: 2, ..ReferenceOptions::default() };
    let w_ref = train_reference(&task, &task.init_weights(2), &opts)?.w;
    let scheme = CompressionScheme::binarize();
    let cfg = LcConfig {
        lstep: LStepSolver::Sgd { alpha: 0.5, beta: 100.0, epochs: 3, batch_size: 16 },
        max_outer: 40,
        seed: 2,
        ..LcConfig::default()
    };
    let lc = lc_run(&task, &scheme, &cfg, &w_ref)?;
    println!("reference {:.4}", task.loss(&w_ref)?);
    println!("DC        {:.4}", task.loss(&dc_run(&task, &scheme, &w_ref)?.compressed)?);
    println!("LC        {:.4} (converged: {})", task.loss(&lc.compressed)?, lc.converged);
    for w in &lc.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
