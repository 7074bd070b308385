//! The LC driver: penalty objectives, L-step solvers, the outer loop and
//! the direct-compression baselines it is compared against.

pub mod baselines;
mod driver;
pub mod lstep;
pub mod schedule;

use serde::{Deserialize, Serialize};

pub use baselines::{dc_run, idc_run, retrain_after_prune, DcResult, IdcHistory, IdcRound, Trainer};
pub use driver::{
    c_step, default_mu0, default_tolerance, lc_run, multiplier_update, LcOutcome, LcState, MetricsRecord,
};
pub use lstep::{l_step_exact, l_step_fixed, l_step_sgd, LStepOutcome};
pub use schedule::{validate_schedule, LearnRateSchedule, ScheduleReport};

use crate::compress::{CompressedParams, Compressor};
use crate::error::{Error, Result};
use crate::model::{LossTask, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Quadratic penalty.
    Qp,
    /// Augmented Lagrangian.
    Al,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "qp" => Ok(Method::Qp),
            "al" => Ok(Method::Al),
            other => Err(Error::invalid("method", format!("expected `qp` or `al`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LStepSolver {
    /// `inner_iters` gradient steps of size `1/(M+μ)` (convex families).
    FixedStepGd { inner_iters: usize },
    /// SGD with the base schedule `α/(β+t)` clipped at `1/μ`.
    Sgd { alpha: f64, beta: f64, epochs: usize, batch_size: usize },
    /// One exact linear solve (least squares only).
    Exact,
}

pub const DEFAULT_A: f64 = 1.4;
pub const DEFAULT_MAX_OUTER: usize = 200;
pub const DEFAULT_INNER_ITERS: usize = 100;
pub const DEFAULT_SGD_EPOCHS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LcConfig {
    pub method: Method,
    /// `None` selects [`default_mu0`].
    pub mu0: Option<f64>,
    /// Multiplicative growth of `μ` per outer iteration.
    pub a: f64,
    pub max_outer: usize,
    /// `None` selects [`default_tolerance`].
    pub constraint_tol: Option<f64>,
    pub lstep: LStepSolver,
    /// Apply the multiplier update under `Method::Al`. With `false` the AL
    /// run keeps `λ = 0` and reproduces the QP trajectory.
    pub multiplier_updates: bool,
    /// L/C step pairs per value of `μ`.
    pub steps_per_mu: usize,
    pub seed: u64,
}

impl Default for LcConfig {
    fn default() -> Self {
        LcConfig {
            method: Method::Al,
            mu0: None,
            a: DEFAULT_A,
            max_outer: DEFAULT_MAX_OUTER,
            constraint_tol: None,
            lstep: LStepSolver::FixedStepGd { inner_iters: DEFAULT_INNER_ITERS },
            multiplier_updates: true,
            steps_per_mu: 1,
            seed: 0,
        }
    }
}

impl LcConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(mu0) = self.mu0 {
            if !(mu0 > 0.0 && mu0.is_finite()) {
                return Err(Error::invalid("mu0", "must be positive"));
            }
        }
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::invalid("a", format!("must be greater than 1 (got {})", self.a)));
        }
        if let Some(tol) = self.constraint_tol {
            if !(tol > 0.0) {
                return Err(Error::invalid("constraint_tol", "must be positive"));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::invalid("max_outer", "must be positive"));
        }
        if self.steps_per_mu == 0 {
            return Err(Error::invalid("steps_per_mu", "must be positive"));
        }
        match self.lstep {
            LStepSolver::Sgd { alpha, beta, batch_size, .. } => {
                LearnRateSchedule::new(alpha, beta, 0.0)?;
                if batch_size == 0 {
                    return Err(Error::invalid("batch_size", "must be positive"));
                }
            }
            LStepSolver::FixedStepGd { .. } | LStepSolver::Exact => {}
        }
        Ok(())
    }
}

/// `L(w) + (μ/2)‖w_c − Δ(Θ)‖²`.
pub fn qp_value(task: &LossTask, comp: &Compressor, w: &WeightVector, theta: &CompressedParams, mu: f64) -> Result<f64> {
    let r = residual(comp, w, theta)?;
    Ok(task.loss(w)? + 0.5 * mu * r.iter().map(|x| x * x).sum::<f64>())
}

/// `L(w) − λᵀ(w_c − Δ(Θ)) + (μ/2)‖w_c − Δ(Θ)‖²`.
pub fn al_value(
    task: &LossTask,
    comp: &Compressor,
    w: &WeightVector,
    theta: &CompressedParams,
    lambda: &[f64],
    mu: f64,
) -> Result<f64> {
    let r = residual(comp, w, theta)?;
    let lin: f64 = lambda.iter().zip(&r).map(|(l, x)| l * x).sum();
    Ok(task.loss(w)? - lin + 0.5 * mu * r.iter().map(|x| x * x).sum::<f64>())
}

/// Completed-square form `L(w) + (μ/2)‖w_c − Δ(Θ) − λ/μ‖² − ‖λ‖²/(2μ)`.
pub fn al_value_completed(
    task: &LossTask,
    comp: &Compressor,
    w: &WeightVector,
    theta: &CompressedParams,
    lambda: &[f64],
    mu: f64,
) -> Result<f64> {
    let r = residual(comp, w, theta)?;
    let shifted: f64 = r.iter().zip(lambda).map(|(x, l)| (x - l / mu) * (x - l / mu)).sum();
    let lsq: f64 = lambda.iter().map(|l| l * l).sum();
    Ok(task.loss(w)? + 0.5 * mu * shifted - lsq / (2.0 * mu))
}

fn residual(comp: &Compressor, w: &WeightVector, theta: &CompressedParams) -> Result<Vec<f64>> {
    comp.check_params(theta)?;
    Ok(comp.gather(w).iter().zip(theta.decompressed()).map(|(a, b)| a - b).collect())
}
