//! Optimizers shared by reference training, the L step and the retraining
//! baselines: fixed-step gradient descent, minibatch SGD and (for least
//! squares) exact quadratic solves.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::task::{LossFamily, LossTask};
use super::weights::{norm, WeightVector};
use crate::error::{Error, Result};
use crate::lc::schedule::LearnRateSchedule;

/// Quadratic coupling `(μ/2) Σ_j (w[indices[j]] − target[j])²`.
#[derive(Debug, Clone, Copy)]
pub struct Penalty<'a> {
    pub mu: f64,
    pub indices: &'a [usize],
    pub target: &'a [f64],
}

impl Penalty<'_> {
    pub fn value(&self, w: &[f64]) -> f64 {
        0.5 * self.mu * self.sq_dist(w)
    }

    fn sq_dist(&self, w: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.target)
            .map(|(&i, &t)| (w[i] - t) * (w[i] - t))
            .sum()
    }

    fn add_grad(&self, w: &[f64], g: &mut [f64]) {
        for (&i, &t) in self.indices.iter().zip(self.target) {
            g[i] += self.mu * (w[i] - t);
        }
    }
}

/// `L(w)` plus the optional penalty.
pub fn penalized_objective(task: &LossTask, w: &WeightVector, penalty: Option<&Penalty>) -> Result<f64> {
    let l = task.loss(w)?;
    Ok(l + penalty.map_or(0.0, |p| p.value(w.values())))
}

pub fn penalized_grad(task: &LossTask, w: &WeightVector, penalty: Option<&Penalty>) -> Result<Vec<f64>> {
    let mut g = task.grad(w)?;
    if let Some(p) = penalty {
        p.add_grad(w.values(), &mut g);
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct GdOutcome {
    pub w: WeightVector,
    pub iters: usize,
    /// Objective before the first step and after every step.
    pub objective: Vec<f64>,
}

/// Runs `iters` steps of gradient descent with a fixed step size on the
/// penalized objective. Only coordinates with `free[i] == true` move when a
/// mask is given. Fails if the objective increases beyond rounding noise.
pub fn gradient_descent(
    task: &LossTask,
    w0: &WeightVector,
    penalty: Option<&Penalty>,
    step: f64,
    iters: usize,
    free: Option<&[bool]>,
) -> Result<GdOutcome> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("step size {step} must be positive")));
    }
    let mut w = w0.clone();
    let mut q = penalized_objective(task, &w, penalty)?;
    let mut objective = Vec::with_capacity(iters + 1);
    objective.push(q);
    for t in 0..iters {
        let mut g = penalized_grad(task, &w, penalty)?;
        if let Some(free) = free {
            for (gi, &f) in g.iter_mut().zip(free) {
                if !f {
                    *gi = 0.0;
                }
            }
        }
        for (wi, gi) in w.values_mut().iter_mut().zip(&g) {
            *wi -= step * gi;
        }
        w.check_finite()
            .map_err(|_| Error::numeric(format!("non-finite iterate at step {t}"), Some(t)))?;
        let next = penalized_objective(task, &w, penalty)?;
        if next > q + 1e-10 * (1.0 + q.abs()) {
            return Err(Error::numeric(
                format!("objective increased at step {t} ({q:e} -> {next:e}); step size too large"),
                Some(t),
            ));
        }
        q = next;
        objective.push(q);
    }
    Ok(GdOutcome { w, iters, objective })
}

#[derive(Debug, Clone)]
pub struct SgdOutcome {
    pub w: WeightVector,
    pub updates: usize,
}

/// Minibatch SGD on the penalized objective. Each epoch draws a fresh
/// Fisher–Yates permutation from a generator seeded once with `seed`; update
/// `t` (counted from 0 across epochs) uses `schedule.rate(t)`.
#[allow(clippy::too_many_arguments)]
pub fn sgd(
    task: &LossTask,
    w0: &WeightVector,
    penalty: Option<&Penalty>,
    schedule: &LearnRateSchedule,
    epochs: usize,
    batch_size: usize,
    seed: u64,
    free: Option<&[bool]>,
) -> Result<SgdOutcome> {
    if batch_size == 0 {
        return Err(Error::invalid("batch_size", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..task.n()).collect();
    let mut w = w0.clone();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            let mut g = task.minibatch_grad(&w, batch)?;
            if let Some(p) = penalty {
                p.add_grad(w.values(), &mut g);
            }
            let eta = schedule.rate(t);
            let values = w.values_mut();
            for (i, (wi, gi)) in values.iter_mut().zip(&g).enumerate() {
                if free.is_none_or(|f| f[i]) {
                    *wi -= eta * gi;
                }
            }
            w.check_finite().map_err(|_| {
                Error::numeric(format!("non-finite iterate at SGD update {t}"), Some(t))
            })?;
            t += 1;
        }
    }
    Ok(SgdOutcome { w, updates: t })
}

/// Exact minimizer of a least-squares loss (plus regularizer and optional
/// penalty) over the coordinates in `free`, the rest held at `template`.
/// Singular systems get the minimum-norm solution.
pub fn least_squares_minimizer(
    task: &LossTask,
    template: &WeightVector,
    free: &[usize],
    penalty: Option<&Penalty>,
) -> Result<WeightVector> {
    if task.family() != LossFamily::LeastSquares {
        return Err(Error::UnsupportedFamily {
            operation: "exact least-squares solve",
            family: task.family().to_string(),
        });
    }
    task.check_weights(template)?;
    let a = task.design();
    let y = match task.targets() {
        super::task::Targets::Real(y) => DVector::from_column_slice(y),
        _ => unreachable!("least squares has real targets"),
    };
    let p = template.len();
    let mut is_free = vec![false; p];
    for &i in free {
        is_free[i] = true;
    }
    // residual after removing the fixed coordinates' contribution
    let mut r = y;
    for (j, (&free_j, &v)) in is_free.iter().zip(template.values()).enumerate() {
        if !free_j && v != 0.0 {
            r -= a.column(j) * v;
        }
    }
    let af = DMatrix::from_fn(a.nrows(), free.len(), |i, k| a[(i, free[k])]);
    let mut h = af.transpose() * &af;
    let mut rhs = af.transpose() * r;
    for k in 0..free.len() {
        h[(k, k)] += task.l2_reg();
    }
    if let Some(pen) = penalty {
        let pos: std::collections::HashMap<usize, usize> =
            free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        for (&i, &t) in pen.indices.iter().zip(pen.target) {
            if let Some(&k) = pos.get(&i) {
                h[(k, k)] += pen.mu;
                rhs[k] += pen.mu * t;
            }
        }
    }
    // h is symmetric PSD; the eigendecomposition gives the minimum-norm
    // solution and, unlike nalgebra's SVD, stays accurate when h is singular
    let eig = h.symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    if !lmax.is_finite() {
        return Err(Error::numeric("least-squares solve failed: non-finite normal matrix", None));
    }
    let coef = eig.eigenvectors.transpose() * &rhs;
    let scaled = DVector::from_fn(coef.len(), |k, _| {
        let l = eig.eigenvalues[k];
        if l > 1e-12 * lmax {
            coef[k] / l
        } else {
            0.0
        }
    });
    let sol = &eig.eigenvectors * scaled;
    let mut values = template.values().to_vec();
    for (k, &i) in free.iter().enumerate() {
        values[i] = sol[k];
    }
    template.with_values(values)
}

#[derive(Debug, Clone)]
pub struct ReferenceOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// SGD settings for non-convex families.
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            max_iters: 100_000,
            grad_tol: 1e-8,
            alpha: 0.5,
            beta: 100.0,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRecord {
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub w: WeightVector,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<TrainRecord>,
}

/// Trains the uncompressed reference model: fixed-step `1/M` gradient
/// descent for the convex families, SGD with the base schedule otherwise.
pub fn train_reference(task: &LossTask, init: &WeightVector, opts: &ReferenceOptions) -> Result<TrainReport> {
    task.check_weights(init)?;
    let mut trace = Vec::new();
    if task.family().is_convex() {
        let step = 1.0 / task.lipschitz_bound()?;
        let mut w = init.clone();
        let mut iterations = 0;
        let mut g = task.grad(&w)?;
        let mut gn = norm(&g);
        while gn >= opts.grad_tol && iterations < opts.max_iters {
            if iterations % 1000 == 0 {
                trace.push(TrainRecord { iter: iterations, loss: task.loss(&w)?, grad_norm: gn });
            }
            for (wi, gi) in w.values_mut().iter_mut().zip(&g) {
                *wi -= step * gi;
            }
            w.check_finite()?;
            iterations += 1;
            g = task.grad(&w)?;
            gn = norm(&g);
        }
        trace.push(TrainRecord { iter: iterations, loss: task.loss(&w)?, grad_norm: gn });
        Ok(TrainReport { w, iterations, grad_norm: gn, converged: gn < opts.grad_tol, trace })
    } else {
        let schedule = LearnRateSchedule::new(opts.alpha, opts.beta, 0.0)?;
        let mut w = init.clone();
        let mut iterations = 0;
        trace.push(TrainRecord { iter: 0, loss: task.loss(&w)?, grad_norm: norm(&task.grad(&w)?) });
        // one epoch per call so the trace has a point per epoch; the
        // schedule continues across calls through the offset.
        for epoch in 0..opts.epochs {
            let sched = schedule.offset(iterations);
            let out = sgd(task, &w, None, &sched, 1, opts.batch_size, opts.seed.wrapping_add(epoch as u64), None)?;
            w = out.w;
            iterations += out.updates;
            trace.push(TrainRecord { iter: iterations, loss: task.loss(&w)?, grad_norm: norm(&task.grad(&w)?) });
        }
        let gn = trace.last().map_or(f64::INFINITY, |r| r.grad_norm);
        Ok(TrainReport { w, iterations, grad_norm: gn, converged: gn < opts.grad_tol, trace })
    }
}
