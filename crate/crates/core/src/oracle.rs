//! Exhaustive ground-truth solvers for tiny instances.
//!
//! These deliberately avoid the production code paths: quantization uses
//! enumeration of contiguous partitions of the sorted weights, low-rank
//! error uses a cyclic Jacobi eigensolver on the Gram matrix instead of the
//! SVD, and restricted least-squares solves go through the same Jacobi
//! pseudo-inverse rather than the production linear algebra.

#![allow(clippy::needless_range_loop)]

use crate::compress::CompressedParams;
use crate::error::{Error, Result};
use crate::model::{LossFamily, LossTask, Targets, WeightVector};

pub const QUANT_MAX_WEIGHTS: usize = 12;
pub const QUANT_MAX_K: usize = 3;
pub const SIGN_MAX_WEIGHTS: usize = 16;
pub const SUPPORT_MAX_WEIGHTS: usize = 16;
pub const LOWRANK_MAX_DIM: usize = 8;

/// Globally optimal parameters with their objective value and, for the
/// loss-based oracles, the full optimal weight vector.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub theta: CompressedParams,
    /// Distortion for `oracle_quant`, loss for the loss-based oracles.
    pub value: f64,
    pub weights: Option<WeightVector>,
}

/// Optimal `K`-level quantization of `x` by enumerating every split of the
/// sorted values into `K` contiguous nonempty groups.
pub fn oracle_quant(x: &[f64], k: usize) -> Result<OracleSolution> {
    let pm = x.len();
    if pm > QUANT_MAX_WEIGHTS || k > QUANT_MAX_K {
        return Err(Error::SizeLimit(format!(
            "quantization oracle handles at most {QUANT_MAX_WEIGHTS} weights and K <= {QUANT_MAX_K} (got {pm}, K = {k})"
        )));
    }
    if k == 0 || k > pm {
        return Err(Error::invalid("k", format!("K = {k} outside 1..={pm}")));
    }
    let mut order: Vec<usize> = (0..pm).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| x[i]).collect();

    let group_cost = |lo: usize, hi: usize| -> (f64, f64) {
        let mean = sorted[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        (mean, sorted[lo..hi].iter().map(|v| (v - mean) * (v - mean)).sum())
    };

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut cuts = Vec::with_capacity(k - 1);
    enumerate_cuts(pm, k - 1, 1, &mut cuts, &mut |cuts| {
        let mut bounds = vec![0];
        bounds.extend_from_slice(cuts);
        bounds.push(pm);
        let mut total = 0.0;
        let mut means = Vec::with_capacity(k);
        for b in bounds.windows(2) {
            let (m, c) = group_cost(b[0], b[1]);
            means.push(m);
            total += c;
        }
        if best.as_ref().is_none_or(|(d, _, _)| total < *d) {
            best = Some((total, bounds, means));
        }
    });
    let (value, bounds, codebook) = best.expect("at least one partition");
    let mut assign = vec![0; pm];
    for (g, b) in bounds.windows(2).enumerate() {
        for &i in &order[b[0]..b[1]] {
            assign[i] = g;
        }
    }
    Ok(OracleSolution { theta: CompressedParams::Quant { codebook, assign }, value, weights: None })
}

/// Calls `f` with every strictly increasing sequence of `count` cut
/// positions drawn from `start..n`.
fn enumerate_cuts(n: usize, count: usize, start: usize, cuts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if count == 0 {
        f(cuts);
        return;
    }
    for c in start..n {
        if n - c < count {
            break;
        }
        cuts.push(c);
        enumerate_cuts(n, count - 1, c + 1, cuts, f);
        cuts.pop();
    }
}

/// Global minimizer of the loss over all `±1` assignments of the masked
/// weights. For least squares the unmasked weights are re-optimized exactly
/// for every sign pattern; for other families they stay at `template`.
pub fn oracle_sign_loss(task: &LossTask, template: &WeightVector) -> Result<OracleSolution> {
    task.check_weights(template)?;
    let masked = template.masked_indices();
    let pm = masked.len();
    if pm > SIGN_MAX_WEIGHTS {
        return Err(Error::SizeLimit(format!(
            "sign oracle handles at most {SIGN_MAX_WEIGHTS} masked weights (got {pm})"
        )));
    }
    if pm == 0 {
        return Err(Error::config("sign oracle needs masked weights"));
    }
    let unmasked: Vec<usize> = (0..template.len()).filter(|i| !template.mask()[*i]).collect();
    let solver = (task.family() == LossFamily::LeastSquares).then(|| RestrictedSolver::new(task, &unmasked));

    let mut best: Option<(f64, Vec<i8>, WeightVector)> = None;
    for bits in 0u32..(1u32 << pm) {
        let signs: Vec<i8> = (0..pm).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect();
        let mut values = template.values().to_vec();
        for (&i, &s) in masked.iter().zip(&signs) {
            values[i] = f64::from(s);
        }
        if let Some(solver) = &solver {
            solver.solve_into(&mut values);
        }
        let w = template.with_values(values)?;
        let loss = task.loss(&w)?;
        if best.as_ref().is_none_or(|(l, _, _)| loss < *l) {
            best = Some((loss, signs, w));
        }
    }
    let (value, signs, w) = best.expect("nonempty enumeration");
    Ok(OracleSolution { theta: CompressedParams::Sign { signs }, value, weights: Some(w) })
}

/// Global minimizer of a least-squares loss subject to at most `kappa`
/// nonzero masked weights, by solving the restricted normal equations
/// (masked support plus all unmasked weights) for every support.
pub fn oracle_support_loss(task: &LossTask, template: &WeightVector, kappa: usize) -> Result<OracleSolution> {
    task.check_weights(template)?;
    if task.family() != LossFamily::LeastSquares {
        return Err(Error::UnsupportedFamily { operation: "oracle_support_loss", family: task.family().to_string() });
    }
    let masked = template.masked_indices();
    let pm = masked.len();
    if pm > SUPPORT_MAX_WEIGHTS {
        return Err(Error::SizeLimit(format!(
            "support oracle handles at most {SUPPORT_MAX_WEIGHTS} masked weights (got {pm})"
        )));
    }
    if kappa < 1 || kappa > pm {
        return Err(Error::invalid("kappa", format!("κ = {kappa} outside 1..={pm}")));
    }
    let unmasked: Vec<usize> = (0..template.len()).filter(|i| !template.mask()[*i]).collect();
    let mut best: Option<(f64, Vec<usize>, WeightVector)> = None;
    let mut cuts = Vec::with_capacity(kappa);
    let mut failure = None;
    // supports are enumerated as strictly increasing index tuples over 0..pm
    enumerate_cuts(pm + 1, kappa, 1, &mut cuts, &mut |sel| {
        if failure.is_some() {
            return;
        }
        let support: Vec<usize> = sel.iter().map(|c| c - 1).collect();
        let mut free: Vec<usize> = support.iter().map(|&j| masked[j]).collect();
        free.extend(&unmasked);
        let mut values = template.values().to_vec();
        for &i in &masked {
            values[i] = 0.0;
        }
        RestrictedSolver::new(task, &free).solve_into(&mut values);
        match template.with_values(values).and_then(|w| task.loss(&w).map(|l| (l, w))) {
            Ok((loss, w)) => {
                if best.as_ref().is_none_or(|(l, _, _)| loss < *l) {
                    best = Some((loss, support, w));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, support, w) = best.expect("nonempty enumeration");
    let vals = support.iter().map(|&j| w.values()[masked[j]]).collect();
    Ok(OracleSolution { theta: CompressedParams::Sparse { len: pm, support, vals }, value, weights: Some(w) })
}

/// Frobenius error of the best rank-`r` approximation of the row-major
/// `m × n` matrix: square root of the trailing eigenvalues of its Gram
/// matrix.
pub fn oracle_lowrank(w: &[f64], m: usize, n: usize, r: usize) -> Result<f64> {
    if m > LOWRANK_MAX_DIM || n > LOWRANK_MAX_DIM {
        return Err(Error::SizeLimit(format!(
            "low-rank oracle handles matrices up to {LOWRANK_MAX_DIM}×{LOWRANK_MAX_DIM} (got {m}×{n})"
        )));
    }
    if w.len() != m * n {
        return Err(Error::config("matrix data does not match its shape"));
    }
    // the smaller Gram matrix has the same nonzero spectrum
    let (dim, gram) = if n <= m {
        (n, (0..n * n).map(|ij| (0..m).map(|k| w[k * n + ij / n] * w[k * n + ij % n]).sum()).collect::<Vec<f64>>())
    } else {
        (m, (0..m * m).map(|ij| (0..n).map(|k| w[(ij / m) * n + k] * w[(ij % m) * n + k]).sum()).collect::<Vec<f64>>())
    };
    let (mut eig, _) = jacobi_eigen(&gram, dim);
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig.iter().skip(r).map(|&e| e.max(0.0)).sum::<f64>().sqrt())
}

/// Cyclic Jacobi eigendecomposition of a symmetric row-major `n × n`
/// matrix. Returns eigenvalues and row-major eigenvectors (column `j` pairs
/// with eigenvalue `j`).
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Minimum-norm least-squares solver over a subset of coordinates, via the
/// Jacobi pseudo-inverse of the restricted Gram matrix.
struct RestrictedSolver<'a> {
    task: &'a LossTask,
    free: Vec<usize>,
    eigvals: Vec<f64>,
    eigvecs: Vec<f64>,
}

impl<'a> RestrictedSolver<'a> {
    fn new(task: &'a LossTask, free: &[usize]) -> Self {
        let k = free.len();
        let mut gram = vec![0.0; k * k];
        for i in 0..task.n() {
            let row = task.row(i);
            for a in 0..k {
                let xa = column_value(row, free[a]);
                for b in 0..k {
                    gram[a * k + b] += xa * column_value(row, free[b]);
                }
            }
        }
        for a in 0..k {
            gram[a * k + a] += task.l2_reg();
        }
        let (eigvals, eigvecs) = jacobi_eigen(&gram, k);
        RestrictedSolver { task, free: free.to_vec(), eigvals, eigvecs }
    }

    /// Overwrites the free coordinates of `values` with the restricted
    /// minimizer given the other coordinates.
    fn solve_into(&self, values: &mut [f64]) {
        let k = self.free.len();
        if k == 0 {
            return;
        }
        let y = match self.task.targets() {
            Targets::Real(y) => y,
            Targets::Class { .. } => unreachable!("least squares"),
        };
        let mut is_free = vec![false; values.len()];
        for &f in &self.free {
            is_free[f] = true;
        }
        let mut rhs = vec![0.0; k];
        for i in 0..self.task.n() {
            let row = self.task.row(i);
            let fixed: f64 = (0..values.len())
                .filter(|&j| !is_free[j])
                .map(|j| column_value(row, j) * values[j])
                .sum();
            let r = y[i] - fixed;
            for a in 0..k {
                rhs[a] += column_value(row, self.free[a]) * r;
            }
        }
        let lmax = self.eigvals.iter().cloned().fold(0.0_f64, f64::max);
        let mut sol = vec![0.0; k];
        for (j, &lam) in self.eigvals.iter().enumerate() {
            if lam <= 1e-12 * lmax {
                continue;
            }
            let proj: f64 = (0..k).map(|a| self.eigvecs[a * k + j] * rhs[a]).sum::<f64>() / lam;
            for a in 0..k {
                sol[a] += proj * self.eigvecs[a * k + j];
            }
        }
        for (a, &f) in self.free.iter().enumerate() {
            values[f] = sol[a];
        }
    }
}

/// Entry `j` of the bias-augmented design row.
fn column_value(row: &[f64], j: usize) -> f64 {
    if j < row.len() {
        row[j]
    } else {
        1.0
    }
}
