//! Iterated direct compression with exact retraining revisits the same
//! parameters after one round; LC keeps improving.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::{idc_run, Trainer};
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 60, 8, 0.3, 1)?.to_task(LossFamily::LeastSquares)?;
    let w_ref = train_reference(&task, &task.init_weights(1), &ReferenceOptions::default())?.w;
    let scheme = CompressionScheme::adaptive_quant(3);

    let h = idc_run(&task, &scheme, &w_ref, 5, &Trainer::Exact)?;
    println!("DC loss {:.6}", task.loss(&h.dc.compressed)?);
    for r in &h.rounds {
        println!(
            "iDC round {}: loss {:.6}, change {:.2e}, repeats {:?}",
            r.round, r.loss_compressed, r.theta_change, r.repeats_round
        );
    }
    println!("cycle detected at round {:?}", h.cycle_detected_at);
    let lc = lc_run(&task, &scheme, &LcConfig::default(), &w_ref)?;
    println!("LC loss {:.6}", task.loss(&lc.compressed)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
