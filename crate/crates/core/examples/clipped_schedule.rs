//! The SGD learning rate `α/(β+t)` clipped at `1/μ`.

use lc_compress::lc::{validate_schedule, LearnRateSchedule};

pub fn run_example() -> lc_compress::Result<()> {
    let (alpha, beta) = (0.5, 10.0);
    for mu in [0.01, 1.0, 100.0] {
        let s = LearnRateSchedule::new(alpha, beta, 0.0)?.clipped(mu);
        let rates: Vec<String> = [0, 10, 100, 1000].iter().map(|&t| format!("{:.2e}", s.rate(t))).collect();
        let report = validate_schedule(alpha, beta, mu, 2000)?;
        println!(
            "mu {mu:>6}: rates at t=0,10,100,1000 [{}], unclipped from t = {:?}, Robbins-Monro {}",
            rates.join(", "),
            report.crossover,
            report.robbins_monro
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> lc_compress::Result<()> {
    run_example()
}
