//! Dense linear-algebra helpers: spectral-norm estimation, rank diagnostics
//! and nonnegative least squares.

use nalgebra::{DMatrix, DVector};

/// Iteration cap for [`power_iteration_ata`].
pub const POWER_MAX_ITERS: usize = 200;
/// Relative change at which power iteration stops early.
pub const POWER_REL_TOL: f64 = 1e-10;
/// Safety inflation applied to the power-iteration estimate.
pub const POWER_INFLATION: f64 = 1.01;

/// Result of estimating `||A^T A||` by power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    /// Rayleigh-quotient estimate of `lambda_max(A^T A)` (a lower bound).
    pub raw: f64,
    /// `raw * POWER_INFLATION`, used wherever an upper bound is required.
    pub inflated: f64,
    pub iterations: usize,
}

/// Estimates `lambda_max(A^T A)` without forming `A^T A`.
///
/// The start vector is deterministic so that repeated runs agree bit for bit.
pub fn power_iteration_ata(a: &DMatrix<f64>) -> PowerEstimate {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return PowerEstimate {
            raw: 0.0,
            inflated: 0.0,
            iterations: 0,
        };
    }
    // ones plus a small index-dependent tilt, so that the start is not orthogonal
    // to the leading eigenvector for structured matrices
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i * 7919 % 97) as f64) / 97.0);
    v /= v.norm();
    let mut lambda = 0.0;
    let mut iterations = 0;
    for it in 1..=POWER_MAX_ITERS {
        iterations = it;
        let av = a * &v;
        let next = av.norm_squared();
        let w = a.tr_mul(&av);
        let wn = w.norm();
        if wn == 0.0 {
            lambda = 0.0;
            break;
        }
        v = w / wn;
        let done = (next - lambda).abs() <= POWER_REL_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    // the Rayleigh quotient at the final iterate is at least as accurate as the last one
    let final_rq = (a * &v).norm_squared();
    let raw = lambda.max(final_rq);
    PowerEstimate {
        raw,
        inflated: raw * POWER_INFLATION,
        iterations,
    }
}

/// Largest singular value via SVD.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Singular values sorted in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn symmetric_eigen_range(q: &DMatrix<f64>) -> (f64, f64) {
    let eig = q.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// `rank` of `a`, counting singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else {
        return 0;
    };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Orthonormal basis of the null space of `a` (columns), by SVD.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    // pad to a square matrix so that the full right-singular basis is available
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = if smax == 0.0 { 0.0 } else { rel_tol * smax };
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `||(H^T H)^{-1} H^T||`, i.e. `1 / sigma_min(H)` for full column rank `H`.
pub fn pinv_norm(h: &DMatrix<f64>) -> Option<f64> {
    let s = singular_values(h);
    if s.len() < h.ncols() {
        return None;
    }
    let smin = *s.last()?;
    (smin > 0.0).then(|| 1.0 / smin)
}

/// Lawson-Hanson nonnegative least squares: `min ||G y - t||` over `y >= 0`.
pub fn nnls(g: &DMatrix<f64>, t: &DVector<f64>) -> DVector<f64> {
    let k = g.ncols();
    let mut y = DVector::zeros(k);
    if k == 0 {
        return y;
    }
    let tol = 1e-12 * (1.0 + g.norm() * t.norm());
    let mut passive = vec![false; k];
    let max_outer = 3 * k + 10;
    for _ in 0..max_outer {
        let w = g.tr_mul(&(t - g * &y));
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else {
            break;
        };
        passive[j] = true;
        for _ in 0..max_outer {
            let z = solve_passive(g, t, &passive);
            let feasible = (0..k).all(|i| !passive[i] || z[i] > 0.0);
            if feasible {
                y = z;
                break;
            }
            // step back toward y until a passive coordinate hits zero
            let mut alpha = 1.0_f64;
            for i in 0..k {
                if passive[i] && z[i] <= 0.0 {
                    let denom = y[i] - z[i];
                    if denom > 0.0 {
                        alpha = alpha.min(y[i] / denom);
                    }
                }
            }
            y += (z - &y) * alpha;
            for i in 0..k {
                if passive[i] && y[i] <= tol {
                    passive[i] = false;
                    y[i] = 0.0;
                }
            }
        }
    }
    y
}

fn solve_passive(g: &DMatrix<f64>, t: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut z = DVector::zeros(passive.len());
    if idx.is_empty() {
        return z;
    }
    let cols: Vec<DVector<f64>> = idx.iter().map(|&i| g.column(i).into_owned()).collect();
    let sub = DMatrix::from_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(t, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(idx.len()));
    for (pos, &i) in idx.iter().enumerate() {
        z[i] = sol[pos];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_matches_eigendecomposition() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.5, -1.0, 3.0]);
        let est = power_iteration_ata(&a);
        let (_, exact) = symmetric_eigen_range(&(a.transpose() * &a));
        assert!((est.raw - exact).abs() <= 1e-8 * exact);
        assert!(est.inflated >= exact);
    }

    #[test]
    fn power_iteration_zero_matrix() {
        let est = power_iteration_ata(&DMatrix::zeros(2, 3));
        assert_eq!(est.raw, 0.0);
    }

    #[test]
    fn null_space_is_orthogonal_to_rows() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn nnls_recovers_clamped_solution() {
        // G = I: solution is max(t, 0)
        let g = DMatrix::identity(3, 3);
        let t = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let y = nnls(&g, &t);
        assert!((y - DVector::from_vec(vec![1.0, 0.0, 0.5])).norm() < 1e-12);
    }

    #[test]
    fn nnls_with_coupled_columns() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let t = DVector::from_vec(vec![2.0, 1.0, 1.0]);
        let y = nnls(&g, &t);
        assert!((y - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-10);
    }
}
