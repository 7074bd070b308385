//! Direct compression and the retraining baselines LC is compared against.

use serde::Serialize;

use super::schedule::LearnRateSchedule;
use crate::compress::{CompressedParams, CompressionScheme};
use crate::error::{Error, Result};
use crate::model::optim::{gradient_descent, least_squares_minimizer, sgd};
use crate::model::{dist, LossFamily, LossTask, WeightVector};

/// Inner solver for the retraining baselines (no penalty term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trainer {
    /// Exact minimizer over the free weights (least squares only).
    Exact,
    /// Fixed-step gradient descent with step `1/M`.
    Gd { iters: usize },
    Sgd { alpha: f64, beta: f64, epochs: usize, batch_size: usize, seed: u64 },
}

impl Trainer {
    /// Minimizes `L` over the coordinates with `free[i] == true`, the others
    /// held at their values in `init`.
    pub fn train(&self, task: &LossTask, init: &WeightVector, free: &[bool]) -> Result<WeightVector> {
        match *self {
            Trainer::Exact => {
                let idx: Vec<usize> = (0..free.len()).filter(|&i| free[i]).collect();
                least_squares_minimizer(task, init, &idx, None)
            }
            Trainer::Gd { iters } => {
                let step = 1.0 / task.lipschitz_bound()?;
                Ok(gradient_descent(task, init, None, step, iters, Some(free))?.w)
            }
            Trainer::Sgd { alpha, beta, epochs, batch_size, seed } => {
                let schedule = LearnRateSchedule::new(alpha, beta, 0.0)?;
                Ok(sgd(task, init, None, &schedule, epochs, batch_size, seed, Some(free))?.w)
            }
        }
    }

    /// A sensible default: exact for least squares, long GD for logistic,
    /// SGD for the MLP.
    pub fn default_for(family: LossFamily) -> Self {
        match family {
            LossFamily::LeastSquares => Trainer::Exact,
            LossFamily::Logistic => Trainer::Gd { iters: 2000 },
            LossFamily::MlpXent => Trainer::Sgd { alpha: 0.5, beta: 100.0, epochs: 20, batch_size: 16, seed: 0 },
        }
    }
}

#[derive(Debug, Clone)]
pub struct DcResult {
    pub theta: CompressedParams,
    /// `Δ(Θ^DC)` with unconstrained weights from `w_ref`.
    pub compressed: WeightVector,
}

/// Direct compression `Θ^DC = Π(w̄)`.
pub fn dc_run(task: &LossTask, scheme: &CompressionScheme, w_ref: &WeightVector) -> Result<DcResult> {
    task.check_weights(w_ref)?;
    let comp = scheme.resolve(w_ref)?;
    let theta = comp.project(w_ref)?;
    let compressed = comp.decompress(&theta, w_ref)?;
    Ok(DcResult { theta, compressed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdcRound {
    pub round: usize,
    /// Loss of the retrained weights.
    pub loss_w: f64,
    /// Loss at `Δ(Θ)` after the round's projection.
    pub loss_compressed: f64,
    /// `‖w_c − Δ(Θ_r)‖` for the retrained `w`.
    pub constraint_norm: f64,
    /// `‖Δ(Θ_r) − Δ(Θ_{r−1})‖`.
    pub theta_change: f64,
    /// Earlier round (0 = direct compression) whose `Δ(Θ)` this round
    /// reproduces within `1e-8`.
    pub repeats_round: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct IdcHistory {
    pub dc: DcResult,
    pub rounds: Vec<IdcRound>,
    pub theta: CompressedParams,
    pub compressed: WeightVector,
    /// First round that revisited an earlier state.
    pub cycle_detected_at: Option<usize>,
}

const CYCLE_TOL: f64 = 1e-8;

/// Iterated direct compression: starting from `Θ^DC`, repeatedly retrain
/// from `Δ(Θ)` without any coupling term and project again.
pub fn idc_run(
    task: &LossTask,
    scheme: &CompressionScheme,
    w_ref: &WeightVector,
    rounds: usize,
    trainer: &Trainer,
) -> Result<IdcHistory> {
    if rounds < 1 {
        return Err(Error::invalid("rounds", "must be at least 1"));
    }
    let dc = dc_run(task, scheme, w_ref)?;
    let comp = scheme.resolve(w_ref)?;
    let free = vec![true; w_ref.len()];
    let mut fingerprints = vec![dc.theta.decompressed()];
    let mut theta = dc.theta.clone();
    let mut compressed = dc.compressed.clone();
    let mut records = Vec::with_capacity(rounds);
    let mut cycle_detected_at = None;
    for r in 1..=rounds {
        let w = trainer.train(task, &compressed, &free)?;
        theta = comp.project(&w)?;
        compressed = comp.decompress(&theta, &w)?;
        let fp = theta.decompressed();
        let theta_change = dist(&fp, fingerprints.last().expect("nonempty"));
        let repeats_round = fingerprints.iter().position(|old| max_abs_diff(old, &fp) <= CYCLE_TOL);
        if repeats_round.is_some() && cycle_detected_at.is_none() {
            cycle_detected_at = Some(r);
        }
        records.push(IdcRound {
            round: r,
            loss_w: task.loss(&w)?,
            loss_compressed: task.loss(&compressed)?,
            constraint_norm: dist(&comp.gather(&w), &fp),
            theta_change,
            repeats_round,
        });
        fingerprints.push(fp);
    }
    Ok(IdcHistory { dc, rounds: records, theta, compressed, cycle_detected_at })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Prunes `w̄` to its `κ` largest-magnitude constrained weights and
/// retrains only those (plus the unconstrained weights); pruned weights stay
/// exactly zero.
pub fn retrain_after_prune(task: &LossTask, w_ref: &WeightVector, kappa: usize, trainer: &Trainer) -> Result<WeightVector> {
    let scheme = CompressionScheme::prune(kappa);
    let dc = dc_run(task, &scheme, w_ref)?;
    let comp = scheme.resolve(w_ref)?;
    let CompressedParams::Sparse { support, .. } = &dc.theta else {
        unreachable!("prune produces sparse parameters")
    };
    let mut free: Vec<bool> = w_ref.mask().iter().map(|m| !m).collect();
    for &s in support {
        free[comp.indices()[s]] = true;
    }
    trainer.train(task, &dc.compressed, &free)
}
