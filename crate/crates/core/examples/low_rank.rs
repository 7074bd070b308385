//! Rank-constrained linear weights: 16 features viewed as a 4×4 matrix.

use lc_compress::compress::storage_cost;
use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::dc_run;
use lc_compress::model::{train_reference, ReferenceOptions, LINEAR_WEIGHTS};
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 100, 16, 0.1, 7)?
        .to_task(LossFamily::LeastSquares)?
        .with_weight_shape(4, 4)?;
    let w_ref = train_reference(&task, &task.init_weights(7), &ReferenceOptions::default())?.w;
    for r in 1..=4 {
        let scheme = CompressionScheme::low_rank(r, LINEAR_WEIGHTS);
        let lc = lc_run(&task, &scheme, &LcConfig::default(), &w_ref)?;
        let dc = dc_run(&task, &scheme, &w_ref)?;
        println!(
            "rank {r}: {:4} bits, DC {:10.4}, LC {:10.4}",
            storage_cost(&lc.state.theta, 32)?.total_bits,
            task.loss(&dc.compressed)?,
            task.loss(&lc.compressed)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
