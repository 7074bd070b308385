//! Trains the uncompressed reference model on synthetic linear data.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::LossFamily;

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 200, 6, 0.1, 1)?.to_task(LossFamily::LeastSquares)?;
    let init = task.init_weights(1);
    println!("initial loss {:.6}", task.loss(&init)?);
    let report = train_reference(&task, &init, &ReferenceOptions { seed: 1, ..ReferenceOptions::default() })?;
    println!(
        "trained: loss {:.6}, |grad| {:.2e} after {} iterations (converged: {})",
        task.loss(&report.w)?,
        report.grad_norm,
        report.iterations,
        report.converged
    );
    println!("Lipschitz bound M = {:.3}", task.lipschitz_bound()?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
