//! Keeping 3 of 10 weights: magnitude pruning, pruning then retraining,
//! LC, and the best support found by enumeration.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::{dc_run, retrain_after_prune, LStepSolver, Trainer};
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::oracle::oracle_support_loss;
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 50, 10, 0.5, 108)?.to_task(LossFamily::LeastSquares)?;
    let w_ref = train_reference(&task, &task.init_weights(8), &ReferenceOptions::default())?.w;
    let scheme = CompressionScheme::prune(3);

    let dc = dc_run(&task, &scheme, &w_ref)?;
    let retrained = retrain_after_prune(&task, &w_ref, 3, &Trainer::Exact)?;
    let lc = lc_run(&task, &scheme, &LcConfig::default(), &w_ref)?;
    // several exact L/C alternations per mu settle the kept values fully
    let settled = LcConfig { lstep: LStepSolver::Exact, steps_per_mu: 100, ..LcConfig::default() };
    let lc_settled = lc_run(&task, &scheme, &settled, &w_ref)?;
    let oracle = oracle_support_loss(&task, &w_ref, 3)?;

    println!("DC (magnitude)     {:.6}", task.loss(&dc.compressed)?);
    println!("prune + retrain    {:.6}", task.loss(&retrained)?);
    println!("LC                 {:.6}", task.loss(&lc.compressed)?);
    println!("LC, 100 steps/mu   {:.6}", task.loss(&lc_settled.compressed)?);
    println!("best support       {:.6}", oracle.value);
    println!("DC support {:?}, LC support {:?}", support(&dc.theta), support(&lc_settled.state.theta));
    Ok(())
}

fn support(theta: &lc_compress::CompressedParams) -> Vec<usize> {
    match theta {
        lc_compress::CompressedParams::Sparse { support, .. } => support.clone(),
        _ => Vec::new(),
    }
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
