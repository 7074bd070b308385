//! Analytic gradients against central differences for all three loss families.

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::model::grad_check;
use lc_compress::LossFamily;

pub fn run_example() -> lc_compress::Result<()> {
    for (kind, family) in [
        (SyntheticKind::Linear, LossFamily::LeastSquares),
        (SyntheticKind::Logistic, LossFamily::Logistic),
        (SyntheticKind::MlpTeacher, LossFamily::MlpXent),
    ] {
        let mut task = gen_synthetic(kind, 30, 4, 0.2, 5)?.to_task(family)?;
        if family == LossFamily::MlpXent {
            task = task.with_hidden(6)?;
        }
        let w = task.init_weights(9);
        let report = grad_check(&task, &w)?;
        println!(
            "{:<14} P = {:3}  max rel err {:.2e}, max abs err {:.2e}",
            family.name(),
            w.len(),
            report.max_rel_err,
            report.max_abs_err
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
