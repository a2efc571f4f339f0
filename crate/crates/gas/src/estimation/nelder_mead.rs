//! Derivative-free simplex minimizer with box handling by clamping.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Stop when the simplex diameter falls below this.
    pub diameter_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions { max_evals: 1_000_000, diameter_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimDiagnostics {
    pub evaluations: usize,
    pub iterations: usize,
    /// True when the diameter tolerance was reached before the eval cap.
    pub converged: bool,
    pub best_objective: f64,
}

fn clamp_into(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Nelder-Mead minimization of `f` from `start` inside the box
/// `[lower, upper]` (entries may be infinite). Trial points are clamped
/// into the box. Stops on the evaluation cap or when the simplex
/// diameter drops below the tolerance; the best point never regresses.
pub fn minimize(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &OptimOptions,
) -> Result<(Vec<f64>, OptimDiagnostics)> {
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut x0 = start.to_vec();
    clamp_into(&mut x0, lower, upper);
    let f0 = eval(&x0, &mut evals);
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    if n == 0 {
        return Ok((
            x0,
            OptimDiagnostics { evaluations: evals, iterations: 0, converged: true, best_objective: f0 },
        ));
    }

    // Initial simplex: perturb each coordinate, flipping the step where a
    // bound would collapse the vertex onto the start point.
    let mut simplex = vec![x0.clone()];
    let mut values = vec![f0];
    for i in 0..n {
        let step = 0.1_f64.max(0.05 * x0[i].abs());
        let mut v = x0.clone();
        v[i] += step;
        clamp_into(&mut v, lower, upper);
        if v[i] == x0[i] {
            v[i] = x0[i] - step;
            clamp_into(&mut v, lower, upper);
        }
        values.push(eval(&v, &mut evals));
        simplex.push(v);
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        // Order ascending by objective value.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let simplex_new: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let values_new: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = simplex_new;
        values = values_new;

        if diameter(&simplex) < options.diameter_tol {
            converged = true;
            break;
        }
        if evals >= options.max_evals {
            break;
        }
        iterations += 1;

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let worst = values[n];
        let second_worst = values[n - 1];
        let best = values[0];

        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(&simplex[n])
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        clamp_into(&mut reflected, lower, upper);
        let f_reflected = eval(&reflected, &mut evals);

        if f_reflected < best {
            let mut expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            clamp_into(&mut expanded, lower, upper);
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[n] = expanded;
                values[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                values[n] = f_reflected;
            }
            continue;
        }
        if f_reflected < second_worst {
            simplex[n] = reflected;
            values[n] = f_reflected;
            continue;
        }

        // Contract (outside if the reflection improved on the worst).
        let (towards, f_towards) =
            if f_reflected < worst { (&reflected, f_reflected) } else { (&simplex[n], worst) };
        let mut contracted: Vec<f64> =
            centroid.iter().zip(towards).map(|(c, w)| c + rho * (w - c)).collect();
        clamp_into(&mut contracted, lower, upper);
        let f_contracted = eval(&contracted, &mut evals);
        if f_contracted < f_towards {
            simplex[n] = contracted;
            values[n] = f_contracted;
            continue;
        }

        // Shrink towards the best vertex.
        for i in 1..=n {
            let best_v = simplex[0].clone();
            for (x, b) in simplex[i].iter_mut().zip(&best_v) {
                *x = b + sigma * (*x - b);
            }
            clamp_into(&mut simplex[i], lower, upper);
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let best_idx = order[0];
    Ok((
        simplex[best_idx].clone(),
        OptimDiagnostics {
            evaluations: evals,
            iterations,
            converged,
            best_objective: values[best_idx],
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic() {
        let mut f = |x: &[f64]| (x[0] - 3.0) * (x[0] - 3.0);
        let (x, diag) = minimize(
            &mut f,
            &[0.0],
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
            &OptimOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(x[0], 3.0, epsilon = 1e-6);
        assert!(diag.converged);
        assert!(diag.best_objective <= 9.0);
    }

    #[test]
    fn quadratic_with_active_bound() {
        let mut f = |x: &[f64]| (x[0] - 3.0) * (x[0] - 3.0);
        let (x, _) =
            minimize(&mut f, &[0.0], &[0.0], &[2.0], &OptimOptions::default()).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let mut f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
        };
        let (x, _) = minimize(
            &mut f,
            &[-1.2, 1.0],
            &[f64::NEG_INFINITY; 2],
            &[f64::INFINITY; 2],
            &OptimOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-3);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn non_finite_start_rejected() {
        let mut f = |_: &[f64]| f64::INFINITY;
        assert!(matches!(
            minimize(&mut f, &[0.0], &[f64::NEG_INFINITY], &[f64::INFINITY], &OptimOptions::default()),
            Err(Error::NonFiniteStart)
        ));
    }

    #[test]
    fn infinity_plateaus_are_escaped() {
        // +inf encodes support violations; the simplex must retreat.
        let mut f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { (x[0] - 1.0).powi(2) };
        let (x, _) = minimize(
            &mut f,
            &[0.2],
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
            &OptimOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-6);
    }
}
