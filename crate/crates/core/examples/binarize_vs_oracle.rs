//! Binarized least squares: LC against direct compression and the
//! exhaustive optimum over all sign patterns.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::lc::dc_run;
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::oracle::oracle_sign_loss;
use lc_compress::{lc_run, CompressionScheme, LcConfig, LossFamily, Method};

pub fn run_example() -> lc_compress::Result<()> {
    let task = gen_synthetic(SyntheticKind::Linear, 50, 8, 0.5, 3)?.to_task(LossFamily::LeastSquares)?;
    let w_ref = train_reference(&task, &task.init_weights(3), &ReferenceOptions::default())?.w;
    let scheme = CompressionScheme::binarize();

    let dc = dc_run(&task, &scheme, &w_ref)?;
    let oracle = oracle_sign_loss(&task, &w_ref)?;
    println!("reference  {:.6}", task.loss(&w_ref)?);
    println!("DC         {:.6}", task.loss(&dc.compressed)?);
    for method in [Method::Qp, Method::Al] {
        let out = lc_run(&task, &scheme, &LcConfig { method, ..LcConfig::default() }, &w_ref)?;
        println!(
            "LC ({:?})    {:.6}  in {} iterations, final mu {:.3e}",
            method,
            task.loss(&out.compressed)?,
            out.state.history.len(),
            out.state.mu
        );
    }
    println!("oracle     {:.6}", oracle.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
