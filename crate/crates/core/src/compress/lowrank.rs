use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const SVD_REL_TOL: f64 = 1e-12;

/// Best rank-`r` Frobenius approximation of the row-major `m × n` matrix,
/// returned as factors `U = U_r Σ_r^½` (`m × r`) and `V = V_r Σ_r^½`
/// (`n × r`), both row-major.
pub fn truncated_factors(w: &[f64], m: usize, n: usize, r: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mat = DMatrix::from_row_slice(m, n, w);
    let scale = mat.amax();
    if scale == 0.0 {
        return Ok((vec![0.0; m * r], vec![0.0; n * r]));
    }
    let unit = &mat / scale;
    let (u, s, vt) = svd_checked(&unit)?;
    let s = s * scale;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let smax = order.first().map_or(0.0, |&i| s[i]);

    let mut uf = vec![0.0; m * r];
    let mut vf = vec![0.0; n * r];
    for (col, &j) in order.iter().take(r).enumerate() {
        if s[j] <= SVD_REL_TOL * smax || s[j] == 0.0 {
            continue;
        }
        let root = s[j].sqrt();
        for i in 0..m {
            uf[i * r + col] = u[(i, j)] * root;
        }
        for i in 0..n {
            vf[i * r + col] = vt[(j, i)] * root;
        }
    }
    Ok((uf, vf))
}

/// SVD of a matrix with entries in `[-1, 1]`. nalgebra's zero-diagonal
/// handling breaks down on rank-deficient input when the convergence
/// threshold is near machine precision (O(1) reconstruction error), so the
/// factorization is verified and retried with looser thresholds.
fn svd_checked(unit: &DMatrix<f64>) -> Result<(DMatrix<f64>, nalgebra::DVector<f64>, DMatrix<f64>)> {
    let norm = unit.norm();
    for eps in [1e-13, 1e-12, 1e-11, 1e-10] {
        let Some(svd) = unit.clone().try_svd(true, true, eps, 10_000) else {
            continue;
        };
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            continue;
        };
        let rebuilt = &u * DMatrix::from_diagonal(&svd.singular_values) * &vt;
        if (rebuilt - unit).norm() <= 1e-10 * norm {
            return Ok((u, svd.singular_values, vt));
        }
    }
    Err(Error::numeric("SVD did not converge", None))
}

/// Row-major `U Vᵀ`.
pub fn outer(u: &[f64], v: &[f64], m: usize, n: usize, r: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[i * n + j] = (0..r).map(|c| u[i * r + c] * v[j * r + c]).sum();
        }
    }
    out
}
