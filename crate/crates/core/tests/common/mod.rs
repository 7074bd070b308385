#![allow(dead_code)]

use lc_compress::io::{gen_synthetic, SyntheticKind};
use lc_compress::model::optim::least_squares_minimizer;
use lc_compress::model::{train_reference, ReferenceOptions};
use lc_compress::{LossFamily, LossTask, WeightVector};

/// Least-squares task on seeded linear synthetic data.
pub fn linear_task(n: usize, d: usize, noise: f64, seed: u64) -> LossTask {
    gen_synthetic(SyntheticKind::Linear, n, d, noise, seed)
        .unwrap()
        .to_task(LossFamily::LeastSquares)
        .unwrap()
}

/// Exact least-squares minimizer with the default mask.
pub fn exact_reference(task: &LossTask) -> WeightVector {
    let init = task.init_weights(0);
    let all: Vec<usize> = (0..init.len()).collect();
    least_squares_minimizer(task, &init, &all, None).unwrap()
}

/// Reference from the production trainer (fixed-step GD for convex tasks).
pub fn trained_reference(task: &LossTask, seed: u64) -> WeightVector {
    let init = task.init_weights(seed);
    train_reference(task, &init, &ReferenceOptions { seed, ..ReferenceOptions::default() })
        .unwrap()
        .w
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
