//! The learning–compression loop.
//!
//! Starting from the reference weights and their direct compression, each
//! outer iteration `k` uses `μ_k = a^k μ_0` and performs an L step on
//! `L(w) + (μ/2)‖w_c − Δ(Θ) − λ/μ‖²`, a C step `Θ = Π(w_c − λ/μ)` and, for
//! the augmented Lagrangian, the update `λ ← λ − μ(w_c − Δ(Θ))`. The loop ends
//! once `‖w_c − Δ(Θ)‖` drops below the tolerance; the deliverable is `Δ(Θ)`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lstep::{l_step_exact, l_step_fixed, l_step_sgd, LStepOutcome};
use super::schedule::LearnRateSchedule;
use super::{LStepSolver, LcConfig, Method};
use crate::compress::{CompressedParams, CompressionScheme, Compressor};
use crate::error::{Error, Result};
use crate::model::{dist, norm, LossTask, WeightVector};

/// One outer iteration. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub k: usize,
    pub mu: f64,
    pub loss_w: f64,
    pub loss_compressed: f64,
    pub constraint_norm: f64,
    pub lambda_norm: f64,
    pub lstep_iters_used: usize,
    pub wallclock_ms: f64,
}

#[derive(Debug, Clone)]
pub struct LcState {
    pub w: WeightVector,
    pub theta: CompressedParams,
    /// Multiplier estimates for the constrained weights; stays zero under QP.
    pub lambda: Vec<f64>,
    pub mu: f64,
    /// Completed outer iterations.
    pub k: usize,
    pub history: Vec<MetricsRecord>,
}

#[derive(Debug, Clone)]
pub struct LcOutcome {
    pub state: LcState,
    /// `Δ(Θ)` with unconstrained entries taken from the final `w`.
    pub compressed: WeightVector,
    pub dc_theta: CompressedParams,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub mu0: f64,
    pub constraint_tol: f64,
}

/// `Π(w_c − λ/μ)`.
pub fn c_step(compressor: &Compressor, w: &WeightVector, lambda: &[f64], mu: f64) -> Result<CompressedParams> {
    if !(mu > 0.0) {
        return Err(Error::invalid("mu", "C step needs μ > 0"));
    }
    let shifted: Vec<f64> = compressor
        .gather(w)
        .iter()
        .zip(lambda)
        .map(|(x, l)| x - l / mu)
        .collect();
    compressor.project_values(&shifted)
}

/// `λ − μ(w_c − Δ(Θ))`.
pub fn multiplier_update(lambda: &[f64], w_c: &[f64], decompressed: &[f64], mu: f64) -> Vec<f64> {
    lambda
        .iter()
        .zip(w_c.iter().zip(decompressed))
        .map(|(l, (w, d))| l - mu * (w - d))
        .collect()
}

/// Scale-aware default `μ_0 = 1e-3 · L(w̄) / (1 + ‖w̄_c − Δ(Θ^DC)‖²)`, falling
/// back to `1e-3 / (1 + ‖·‖²)` when the reference loss vanishes.
pub fn default_mu0(ref_loss: f64, dc_distance: f64) -> f64 {
    let scale = if ref_loss > 1e-12 { ref_loss } else { 1.0 };
    1e-3 * scale / (1.0 + dc_distance * dc_distance)
}

pub fn default_tolerance(constrained: usize) -> f64 {
    1e-6 * (constrained as f64).sqrt()
}

/// Runs the LC algorithm from the reference weights `w_ref`.
pub fn lc_run(task: &LossTask, scheme: &CompressionScheme, config: &LcConfig, w_ref: &WeightVector) -> Result<LcOutcome> {
    config.validate()?;
    task.check_weights(w_ref)?;
    let comp = scheme.resolve(w_ref)?;
    let idx = comp.indices().to_vec();
    let pm = idx.len();

    let lipschitz = match config.lstep {
        LStepSolver::FixedStepGd { .. } => Some(task.lipschitz_bound()?),
        _ => None,
    };

    let dc_theta = comp.project(w_ref)?;
    let dc_values = dc_theta.decompressed();
    let dc_distance = dist(&comp.gather(w_ref), &dc_values);
    let mu0 = match config.mu0 {
        Some(m) => m,
        None => default_mu0(task.loss(w_ref)?, dc_distance),
    };
    let tol = config.constraint_tol.unwrap_or_else(|| default_tolerance(pm));

    let mut state = LcState {
        w: w_ref.clone(),
        theta: dc_theta.clone(),
        lambda: vec![0.0; pm],
        mu: mu0,
        k: 0,
        history: Vec::new(),
    };
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut at_dc = true;
    let mut norms = vec![dc_distance];
    let started = Instant::now();

    for k in 0..config.max_outer {
        let mu = mu0 * config.a.powi(k as i32);
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::numeric(format!("penalty parameter overflowed at iteration {}", k + 1), Some(k)));
        }
        let mut iters = 0;
        for rep in 0..config.steps_per_mu.max(1) {
            let decompressed = state.theta.decompressed();
            let target: Vec<f64> = decompressed.iter().zip(&state.lambda).map(|(d, l)| d + l / mu).collect();
            let seed = config.seed ^ ((k * config.steps_per_mu.max(1) + rep) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let out = l_step(task, &state.w, &idx, &target, mu, config, lipschitz, seed)?;
            iters += out.iters;
            state.w = out.w;
            state.theta = c_step(&comp, &state.w, &state.lambda, mu)?;
        }
        let w_c = comp.gather(&state.w);
        let decompressed = state.theta.decompressed();
        if config.method == Method::Al && config.multiplier_updates {
            state.lambda = multiplier_update(&state.lambda, &w_c, &decompressed, mu);
        }
        let constraint_norm = dist(&w_c, &decompressed);
        let compressed = comp.decompress(&state.theta, &state.w)?;
        state.mu = mu;
        state.k = k + 1;
        state.history.push(MetricsRecord {
            k: k + 1,
            mu,
            loss_w: task.loss(&state.w)?,
            loss_compressed: task.loss(&compressed)?,
            constraint_norm,
            lambda_norm: norm(&state.lambda),
            lstep_iters_used: iters,
            wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
        });

        at_dc &= dist(&decompressed, &dc_values) <= 1e-10 * (1.0 + norm(&dc_values));
        norms.push(constraint_norm);
        if warnings.is_empty() && stuck_at_dc(at_dc, &norms, tol) {
            warnings.push(format!(
                "iterates stuck at the direct-compression value after {} outer iterations while \
                 the constraint norm collapsed ({:.3e} -> {:.3e}); μ grows too fast, try a smaller `a` (now {})",
                k + 1,
                dc_distance,
                constraint_norm,
                config.a
            ));
        }
        if constraint_norm < tol {
            converged = true;
            break;
        }
    }
    let compressed = comp.decompress(&state.theta, &state.w)?;
    Ok(LcOutcome { state, compressed, dc_theta, converged, warnings, mu0, constraint_tol: tol })
}

/// `Θ` has not left the direct-compression value during at least three
/// outer iterations, and within the last three of them the constraint norm
/// fell from at least 90% to at most 10% of the initial distance
/// `‖w̄_c − Δ(Θ^DC)‖`: `w` was pulled onto `Δ(Θ^DC)` before the C step could
/// move.
fn stuck_at_dc(at_dc: bool, norms: &[f64], tol: f64) -> bool {
    let k = norms.len() - 1;
    let d0 = norms[0];
    if !at_dc || k < 3 || d0 <= 0.0 {
        return false;
    }
    let last = norms[k];
    last > tol && last <= 0.1 * d0 && norms[k - 3] >= 0.9 * d0
}

#[allow(clippy::too_many_arguments)]
fn l_step(
    task: &LossTask,
    w: &WeightVector,
    idx: &[usize],
    target: &[f64],
    mu: f64,
    config: &LcConfig,
    lipschitz: Option<f64>,
    seed: u64,
) -> Result<LStepOutcome> {
    match config.lstep {
        LStepSolver::FixedStepGd { inner_iters } => {
            l_step_fixed(task, w, idx, target, mu, inner_iters, lipschitz.expect("computed for GD"))
        }
        LStepSolver::Sgd { alpha, beta, epochs, batch_size } => {
            let schedule = LearnRateSchedule::new(alpha, beta, 0.0)?.clipped(mu);
            l_step_sgd(task, w, idx, target, mu, &schedule, epochs, batch_size, seed)
        }
        LStepSolver::Exact => l_step_exact(task, w, idx, target, mu),
    }
}
