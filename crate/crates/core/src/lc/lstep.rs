//! L-step solvers for `min_w L(w) + (μ/2)‖w_c − target‖²`, where `w_c` are
//! the constrained weights and `target = Δ(Θ) + λ/μ`.

use super::schedule::LearnRateSchedule;
use crate::error::{Error, Result};
use crate::model::optim::{self, Penalty};
use crate::model::{LossTask, WeightVector};

#[derive(Debug, Clone)]
pub struct LStepOutcome {
    pub w: WeightVector,
    /// GD steps, SGD updates, or 1 for an exact solve.
    pub iters: usize,
    /// Objective before and after each GD step (GD only).
    pub objective: Vec<f64>,
}

/// Fixed-step gradient descent with step `1/(M+μ)`, where `lipschitz` is a
/// bound `M` on the loss gradient's Lipschitz constant.
pub fn l_step_fixed(
    task: &LossTask,
    w0: &WeightVector,
    indices: &[usize],
    target: &[f64],
    mu: f64,
    inner_iters: usize,
    lipschitz: f64,
) -> Result<LStepOutcome> {
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid("lipschitz", "bound must be finite and nonnegative"));
    }
    let penalty = Penalty { mu, indices, target };
    let out = optim::gradient_descent(task, w0, Some(&penalty), 1.0 / (lipschitz + mu), inner_iters, None)?;
    Ok(LStepOutcome { w: out.w, iters: out.iters, objective: out.objective })
}

/// Minibatch SGD on the L-step objective with
/// `w ← w − η_t (∇_B L(w) + μ(w − target))`. The caller clips `schedule`
/// at the current `μ`.
#[allow(clippy::too_many_arguments)]
pub fn l_step_sgd(
    task: &LossTask,
    w0: &WeightVector,
    indices: &[usize],
    target: &[f64],
    mu: f64,
    schedule: &LearnRateSchedule,
    epochs: usize,
    batch_size: usize,
    seed: u64,
) -> Result<LStepOutcome> {
    let penalty = Penalty { mu, indices, target };
    let out = optim::sgd(task, w0, Some(&penalty), schedule, epochs, batch_size, seed, None)?;
    Ok(LStepOutcome { w: out.w, iters: out.updates, objective: Vec::new() })
}

/// Exact L step for least squares (one linear solve).
pub fn l_step_exact(
    task: &LossTask,
    w0: &WeightVector,
    indices: &[usize],
    target: &[f64],
    mu: f64,
) -> Result<LStepOutcome> {
    let penalty = Penalty { mu, indices, target };
    let all: Vec<usize> = (0..w0.len()).collect();
    let w = optim::least_squares_minimizer(task, w0, &all, Some(&penalty))?;
    Ok(LStepOutcome { w, iters: 1, objective: Vec::new() })
}
