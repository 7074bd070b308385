use super::task::LossTask;
use super::weights::WeightVector;
use crate::error::Result;

/// Coordinates whose analytic and numeric derivatives differ by at most this
/// much count as agreeing, whatever their relative error.
pub const ABS_FALLBACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientReport {
    pub max_rel_err: f64,
    pub worst_index: usize,
    /// Largest `|analytic − numeric|` over all coordinates.
    pub max_abs_err: f64,
    /// Largest finite-difference step used.
    pub step_used: f64,
}

/// Compares [`LossTask::grad`] against central differences with step
/// `1e-6·(1+|w_i|)` per coordinate.
pub fn grad_check(task: &LossTask, w: &WeightVector) -> Result<GradientReport> {
    let analytic = task.grad(w)?;
    compare_gradient(task, w, &analytic)
}

/// Same as [`grad_check`] but against a caller-supplied gradient.
pub fn compare_gradient(task: &LossTask, w: &WeightVector, analytic: &[f64]) -> Result<GradientReport> {
    let mut probe = w.clone();
    let mut report = GradientReport { max_rel_err: 0.0, worst_index: 0, max_abs_err: 0.0, step_used: 0.0 };
    for (i, &a) in analytic.iter().enumerate() {
        let wi = w.values()[i];
        let h = 1e-6 * (1.0 + wi.abs());
        probe.values_mut()[i] = wi + h;
        let fp = task.loss(&probe)?;
        probe.values_mut()[i] = wi - h;
        let fm = task.loss(&probe)?;
        probe.values_mut()[i] = wi;
        let numeric = (fp - fm) / (2.0 * h);
        let diff = (a - numeric).abs();
        report.max_abs_err = report.max_abs_err.max(diff);
        let err = if diff <= ABS_FALLBACK {
            0.0
        } else {
            diff / a.abs().max(numeric.abs())
        };
        if err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_index = i;
        }
        report.step_used = report.step_used.max(h);
    }
    Ok(report)
}
