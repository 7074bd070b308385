//! One-dimensional k-means (Lloyd, then Hartigan single-point moves once
//! Lloyd stalls) with k-means++ seeding and restarts.
//!
//! The distortion `Σ_i (x_i − c_{a_i})²` is always summed in point order, and
//! a center update that would raise it is rejected, so the recorded
//! distortion never increases between iterations.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ITER: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// Ascending.
    pub codebook: Vec<f64>,
    pub assign: Vec<usize>,
    pub distortion: f64,
    pub iterations: usize,
    /// Distortion after seeding, then after each Lloyd iteration, for the
    /// restart that was kept.
    pub history: Vec<f64>,
}

pub fn distortion(x: &[f64], centers: &[f64], assign: &[usize]) -> f64 {
    x.iter()
        .zip(assign)
        .map(|(&xi, &a)| (xi - centers[a]) * (xi - centers[a]))
        .sum()
}

/// Best of `restarts` seeded Lloyd runs; ties keep the earliest restart.
pub fn kmeans_1d(x: &[f64], k: usize, restarts: usize, seed: u64) -> KMeansResult {
    assert!(k >= 1 && k <= x.len(), "k-means needs 1 <= k <= n");
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64)));
        let init = plus_plus_init(x, k, &mut rng);
        let run = lloyd(x, init);
        if best.as_ref().is_none_or(|b| run.distortion < b.distortion) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    canonicalize(&mut best);
    best
}

/// k-means++ seeding: first center uniform, the rest drawn with
/// probability proportional to squared distance to the nearest center.
fn plus_plus_init<R: Rng>(x: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k);
    centers.push(x[rng.random_range(0..x.len())]);
    let mut d2: Vec<f64> = x.iter().map(|&xi| (xi - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => x[dist.sample(rng)],
            // every point already sits on a center
            Err(_) => x[rng.random_range(0..x.len())],
        };
        centers.push(next);
        for (di, &xi) in d2.iter_mut().zip(x) {
            *di = di.min((xi - next).powi(2));
        }
    }
    centers
}

fn nearest(xi: f64, centers: &[f64], current: Option<usize>) -> usize {
    let mut best = current.unwrap_or(0);
    let mut best_d = (xi - centers[best]).powi(2);
    for (c, &cv) in centers.iter().enumerate() {
        let d = (xi - cv).powi(2);
        if d < best_d || (d == best_d && current.is_none() && c < best) {
            best = c;
            best_d = d;
        }
    }
    best
}

fn lloyd(x: &[f64], mut centers: Vec<f64>) -> KMeansResult {
    let k = centers.len();
    let mut assign: Vec<usize> = x.iter().map(|&xi| nearest(xi, &centers, None)).collect();
    let mut current = distortion(x, &centers, &assign);
    let mut history = vec![current];
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let mut changed = false;

        // center update, rejected if it would raise the distortion
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&xi, &a) in x.iter().zip(&assign) {
            sums[a] += xi;
            counts[a] += 1;
        }
        let candidate: Vec<f64> = (0..k)
            .map(|c| if counts[c] > 0 { sums[c] / counts[c] as f64 } else { centers[c] })
            .collect();
        if candidate != centers {
            let d = distortion(x, &candidate, &assign);
            if d <= current {
                centers = candidate;
                changed = true;
            }
        }

        // empty clusters take the point farthest from its center
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..x.len())
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&i, &j| {
                    let di = (x[i] - centers[assign[i]]).powi(2);
                    let dj = (x[j] - centers[assign[j]]).powi(2);
                    di.total_cmp(&dj).then(j.cmp(&i))
                });
            if let Some(p) = far {
                counts[assign[p]] -= 1;
                counts[c] = 1;
                assign[p] = c;
                centers[c] = x[p];
                changed = true;
            }
        }

        // reassignment; a point only moves to a strictly closer center
        for (i, &xi) in x.iter().enumerate() {
            let a = nearest(xi, &centers, Some(assign[i]));
            if a != assign[i] {
                assign[i] = a;
                changed = true;
            }
        }
        current = distortion(x, &centers, &assign);
        if !changed {
            // Lloyd is stuck; try single-point moves before giving up
            match hartigan_move(x, &mut centers, &mut assign, current) {
                Some(d) => current = d,
                None => {
                    history.push(current);
                    break;
                }
            }
        }
        history.push(current);
    }
    KMeansResult { codebook: centers, assign, distortion: current, iterations, history }
}

/// Best single-point transfer under the exact cost change
/// `n_b/(n_b+1)(x−c_b)² − n_a/(n_a−1)(x−c_a)²`, applied with both centers
/// reset to their means. Kept only if the recomputed distortion drops.
fn hartigan_move(x: &[f64], centers: &mut [f64], assign: &mut [usize], current: f64) -> Option<f64> {
    let k = centers.len();
    let mut counts = vec![0usize; k];
    for &a in assign.iter() {
        counts[a] += 1;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, &xi) in x.iter().enumerate() {
        let a = assign[i];
        if counts[a] < 2 {
            continue;
        }
        let na = counts[a] as f64;
        let removal = na / (na - 1.0) * (xi - centers[a]).powi(2);
        for b in (0..k).filter(|&b| b != a) {
            let nb = counts[b] as f64;
            let delta = nb / (nb + 1.0) * (xi - centers[b]).powi(2) - removal;
            if delta < 0.0 && best.is_none_or(|(d, _, _)| delta < d) {
                best = Some((delta, i, b));
            }
        }
    }
    let (_, i, b) = best?;
    let a = assign[i];
    let old = (assign[i], centers[a], centers[b]);
    assign[i] = b;
    for c in [a, b] {
        let (sum, n) = x.iter().zip(assign.iter()).filter(|(_, &ai)| ai == c).fold((0.0, 0usize), |(s, n), (xi, _)| (s + xi, n + 1));
        centers[c] = sum / n as f64;
    }
    let d = distortion(x, centers, assign);
    if d < current {
        Some(d)
    } else {
        assign[i] = old.0;
        centers[a] = old.1;
        centers[b] = old.2;
        None
    }
}

/// Sorts the codebook ascending and remaps assignments.
fn canonicalize(res: &mut KMeansResult) {
    let mut order: Vec<usize> = (0..res.codebook.len()).collect();
    order.sort_by(|&a, &b| res.codebook[a].total_cmp(&res.codebook[b]).then(a.cmp(&b)));
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    res.codebook = order.iter().map(|&o| res.codebook[o]).collect();
    for a in &mut res.assign {
        *a = remap[*a];
    }
}
