//! Adaptive quantization at several codebook sizes: loss against storage.

use lc_compress::compress::storage_cost;
use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::dc_run;
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 100, 16, 0.1, 7)?.to_task(LossFamily::LeastSquares)?;
    let w_ref = train_reference(&task, &task.init_weights(7), &ReferenceOptions::default())?.w;
    println!("  K      bits   DC loss      LC loss");
    for k in [1, 2, 4, 8] {
        let scheme = CompressionScheme::adaptive_quant(k);
        let lc = lc_run(&task, &scheme, &LcConfig::default(), &w_ref)?;
        let dc = dc_run(&task, &scheme, &w_ref)?;
        println!(
            "{k:3} {:9} {:10.4} {:12.4}",
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
