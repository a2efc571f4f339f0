//! Finite-difference Hessian of the log-likelihood.

use nalgebra::DMatrix;

/// Central second differences with per-coordinate step
/// h_i = 1e-4 * max(1, |theta_i|), symmetrized as (H + H')/2.
/// Returns `None` when any entry comes out non-finite.
pub fn numeric_hessian(f: &mut dyn FnMut(&[f64]) -> f64, at: &[f64]) -> Option<DMatrix<f64>> {
    let n = at.len();
    let h: Vec<f64> = at.iter().map(|&v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(at);
    if !f0.is_finite() {
        return None;
    }
    let mut hess = DMatrix::zeros(n, n);
    let mut x = at.to_vec();
    for i in 0..n {
        x[i] = at[i] + h[i];
        let fp = f(&x);
        x[i] = at[i] - h[i];
        let fm = f(&x);
        x[i] = at[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            x[i] = at[i] + h[i];
            x[j] = at[j] + h[j];
            let fpp = f(&x);
            x[j] = at[j] - h[j];
            let fpm = f(&x);
            x[i] = at[i] - h[i];
            x[j] = at[j] + h[j];
            let fmp = f(&x);
            x[j] = at[j] - h[j];
            let fmm = f(&x);
            x[i] = at[i];
            x[j] = at[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    Some(sym)
}
