//! Symmetric-matrix helpers built on nalgebra.
//!
//! All inversions in this crate are eigen-based pseudo-inversions with a
//! relative cutoff, so near-singular scaling and covariance matrices are
//! handled without panics.

use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue cutoff used by the pseudo-inverses.
pub const EIG_CUTOFF: f64 = 1e-10;

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Apply `f` to the eigenvalues of a symmetric matrix and recompose.
///
/// Exactly diagonal inputs take a componentwise fast path, so orthogonal
/// parametrizations see bitwise-identical results across the full,
/// sub-matrix, and diagonal scaling variants.
fn eigen_map(m: &DMatrix<f64>, f: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let n = m.nrows();
    if is_diagonal(m) {
        let lambda_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = f(m[(i, i)], lambda_max);
        }
        return out;
    }
    let eig = m.clone().symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    let mapped = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| f(l, lambda_max)));
    &eig.eigenvectors * DMatrix::from_diagonal(&mapped) * eig.eigenvectors.transpose()
}

/// Eigen-based pseudo-inverse; eigenvalues below `EIG_CUTOFF * lambda_max`
/// in magnitude are dropped. Returns the inverse and whether any mode was
/// dropped (degenerate input).
pub fn sym_pinv(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let mut degenerate = false;
    let n = m.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), false);
    }
    let inv = eigen_map(m, |l, lmax| {
        if l.abs() <= EIG_CUTOFF * lmax || lmax == 0.0 {
            0.0
        } else {
            1.0 / l
        }
    });
    // Re-run the scan for the flag (eigen_map is pure).
    let eigvals: Vec<f64> = if is_diagonal(m) {
        (0..n).map(|i| m[(i, i)]).collect()
    } else {
        m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    };
    let lmax = eigvals.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    if lmax == 0.0 || eigvals.iter().any(|&l| l.abs() <= EIG_CUTOFF * lmax) {
        degenerate = true;
    }
    (inv, degenerate)
}

/// Symmetric inverse square root through the eigendecomposition;
/// negative eigenvalues clamp to zero before the root, small ones drop.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    eigen_map(m, |l, lmax| {
        let l = l.max(0.0);
        if l <= EIG_CUTOFF * lmax || lmax == 0.0 {
            0.0
        } else {
            1.0 / l.sqrt()
        }
    })
}

/// PSD square root with negative eigenvalues clamped to zero.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    eigen_map(m, |l, _| l.max(0.0).sqrt())
}

/// Lower-triangular factor L with L L' = m, for multivariate normal draws.
/// Tries Cholesky, then Cholesky with a small jitter, then falls back to
/// the PSD eigen square root.
pub fn mvn_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if let Some(chol) = nalgebra::Cholesky::new(m.clone()) {
        return chol.l();
    }
    let jitter = EIG_CUTOFF * m.trace() / n.max(1) as f64;
    let jittered = m + DMatrix::identity(n, n) * jitter;
    if let Some(chol) = nalgebra::Cholesky::new(jittered) {
        return chol.l();
    }
    sym_sqrt(m)
}

/// Largest absolute asymmetry |m - m'| entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
