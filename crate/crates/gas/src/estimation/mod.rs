//! Maximum-likelihood estimation: starting grid, derivative-free
//! optimization, finite-difference Hessian, and asymptotic inference.

mod hessian;
mod nelder_mead;
mod structure;

pub use hessian::numeric_hessian;
pub use nelder_mead::{minimize, OptimDiagnostics, OptimOptions};
pub use structure::{build_structure, coef_index, ConstraintSpec, SpecialConstraint, Structure};

use crate::distribution::registry;
use crate::dynamics::{filter_pass, CoefSet, FilterOutput, Model, ModelSpec, RegressMode, SeriesData};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::Mat;
use crate::special::normal_two_sided_p;

/// Options mirroring the estimation argument surface.
#[derive(Debug, Clone, Default)]
pub struct EstimationOptions {
    /// Number of initial non-missing likelihood terms to exclude.
    pub lik_skip: usize,
    /// Full starting coefficient vector; bypasses the grid.
    pub coef_start: Option<Vec<f64>>,
    pub optim: OptimOptions,
    pub print_progress: bool,
}

/// Hessian-based inference over the full coefficient vector.
#[derive(Debug, Clone)]
pub struct Inference {
    pub vcov: Mat,
    pub sd: Vec<f64>,
    /// `None` where the standard deviation is zero (fixed coefficients).
    pub z: Vec<Option<f64>>,
    pub p: Vec<Option<f64>>,
    /// True when the negative Hessian was singular and a pseudo-inverse
    /// was used.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct OptimSummary {
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Free coordinates the optimizer started from.
    pub start_free: Vec<f64>,
    pub hessian_ok: bool,
}

/// Everything produced by [`estimate`].
pub struct EstimationResult {
    pub model: Model,
    pub data: SeriesData,
    pub constraints: ConstraintSpec,
    pub structure: Structure,
    pub coef: CoefSet,
    /// `None` when the Hessian could not be computed.
    pub inference: Option<Inference>,
    pub filter: FilterOutput,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub optim: OptimSummary,
    pub options: EstimationOptions,
}

impl EstimationResult {
    pub fn coef_labels(&self) -> &[String] {
        self.model.coef_labels()
    }
}

/// Akaike and Bayesian information criteria from the log-likelihood, the
/// number of free coefficients, and the number of used observations.
pub fn info_criteria(loglik: f64, k: usize, t_eff: usize) -> (f64, f64) {
    let aic = 2.0 * k as f64 - 2.0 * loglik;
    let bic = k as f64 * (t_eff.max(1) as f64).ln() - 2.0 * loglik;
    (aic, bic)
}

/// The negative filtered log-likelihood over free coordinates; +inf
/// encodes bound violations and numeric failures so derivative-free
/// optimizers can retreat.
pub fn make_objective<'a>(
    model: &'a Model,
    structure: &'a Structure,
    data: &'a SeriesData,
    lik_skip: usize,
) -> impl FnMut(&[f64]) -> f64 + 'a {
    move |free: &[f64]| {
        for ((v, lo), hi) in free.iter().zip(&structure.lower_free).zip(&structure.upper_free) {
            if v < lo || v > hi {
                return f64::INFINITY;
            }
        }
        let full = structure.expand(free);
        let coef = match CoefSet::new(model, full) {
            Ok(c) => c,
            Err(_) => return f64::INFINITY,
        };
        match filter_pass(model, &coef, data, lik_skip) {
            Ok(out) if out.loglik_sum.is_finite() => -out.loglik_sum,
            _ => f64::INFINITY,
        }
    }
}

/// Grid of candidate coefficient vectors: per time-varying parameter,
/// alpha1 in {0, 0.05} and phi1 in {0, 0.5, 0.9} (higher lags zero),
/// omega chosen so the long-term value hits the link-transformed
/// starting estimate, betas zero, static levels at their starting
/// estimates.
fn grid_candidates(model: &Model, data: &SeriesData) -> Result<Vec<Vec<f64>>> {
    let start = crate::distribution::start_values(&model.dist, &data.y)?;
    let desc = model.dist.descriptor();
    let target: Vec<f64> = (0..model.param_count())
        .map(|i| {
            if model.par_link[i] {
                crate::distribution::link_apply_component(desc.param_supports[i], start.0[i])
            } else {
                start.0[i]
            }
        })
        .collect();

    let tv = model.tv_params();
    let alphas = [0.0, 0.05];
    let phis = [0.0, 0.5, 0.9];
    // Cartesian product of (alpha, phi) choices across TV parameters.
    let mut combos: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for &i in tv {
        let a_opts: &[f64] = if model.p[i] > 0 { &alphas } else { &[0.0] };
        let p_opts: &[f64] = if model.q[i] > 0 { &phis } else { &[0.0] };
        let mut next = Vec::with_capacity(combos.len() * a_opts.len() * p_opts.len());
        for combo in &combos {
            for &a in a_opts {
                for &ph in p_opts {
                    let mut c = combo.clone();
                    c.push((a, ph));
                    next.push(c);
                }
            }
        }
        combos = next;
    }

    let mut out = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut full = vec![0.0; model.coef_count()];
        let mut offset = 0;
        let mut tv_idx = 0;
        for i in 0..model.param_count() {
            if model.par_static[i] {
                full[offset] = target[i];
                offset += 1;
                continue;
            }
            let (a, ph) = combo[tv_idx];
            tv_idx += 1;
            let omega = match model.regress {
                RegressMode::Joint => (1.0 - ph) * target[i],
                RegressMode::Sep => target[i],
            };
            full[offset] = omega;
            offset += 1 + model.m[i]; // betas stay zero
            if model.p[i] > 0 {
                full[offset] = a;
            }
            offset += model.p[i];
            if model.q[i] > 0 {
                full[offset] = ph;
            }
            offset += model.q[i];
        }
        out.push(full);
    }
    Ok(out)
}

/// The free coefficient vector with the best finite filtered likelihood
/// over the starting grid, projected into bounds and constraints.
pub fn grid_start(
    model: &Model,
    structure: &Structure,
    data: &SeriesData,
    lik_skip: usize,
) -> Result<Vec<f64>> {
    let mut objective = make_objective(model, structure, data, lik_skip);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for full in grid_candidates(model, data)? {
        let mut free = structure.reduce(&full);
        structure.clamp_free(&mut free);
        let value = objective(&free);
        if value.is_finite() && best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, free));
        }
    }
    best.map(|(_, free)| free).ok_or(Error::EstimationStart)
}

/// Inference from the free-coordinate Hessian of the log-likelihood: the
/// free covariance is (-H)^-1 (pseudo-inverted when singular), expanded
/// to the full coefficient vector through the affine constraint map.
pub fn infer(
    structure: &Structure,
    coef: &[f64],
    hessian_free: &nalgebra::DMatrix<f64>,
) -> Inference {
    let (vcov_free, degenerate) = linalg::sym_pinv(&(-hessian_free));
    let a = structure.expansion_matrix();
    let vcov_full = &a * vcov_free * a.transpose();
    let n = structure.n_coef();
    let mut sd = vec![0.0; n];
    let mut z = vec![None; n];
    let mut p = vec![None; n];
    for i in 0..n {
        let var = vcov_full[(i, i)];
        sd[i] = if var > 0.0 { var.sqrt() } else { 0.0 };
        if sd[i] > 0.0 {
            let zi = coef[i] / sd[i];
            z[i] = Some(zi);
            p[i] = Some(normal_two_sided_p(zi));
        }
    }
    Inference { vcov: Mat::from_nalgebra(&vcov_full), sd, z, p, degenerate }
}

/// Estimate a model on a series: structure building, starting grid (or a
/// user start), simplex maximization, filtering at the optimum, Hessian,
/// inference, and information criteria.
pub fn estimate(
    data: &SeriesData,
    spec: &ModelSpec,
    constraints: &ConstraintSpec,
    options: &EstimationOptions,
) -> Result<EstimationResult> {
    let model = Model::from_spec(spec, registry())?;
    estimate_model(model, data.clone(), constraints, options)
}

/// [`estimate`] with a pre-built model (used by bootstrap replicates).
pub fn estimate_model(
    mut model: Model,
    data: SeriesData,
    constraints: &ConstraintSpec,
    options: &EstimationOptions,
) -> Result<EstimationResult> {
    data.validate(&model)?;
    let structure = build_structure(&model, constraints)?;

    // A constraint system that pins the recursion at a unit root (e.g.
    // random_walk) has no long-term value; default the initialization to
    // the link-transformed starting estimate.
    if model.par_init.is_none() && joint_unit_root_forced(&model, &structure) {
        let start = crate::distribution::start_values(&model.dist, &data.y)?;
        let desc = model.dist.descriptor();
        let init: Vec<f64> = (0..model.param_count())
            .map(|i| {
                if model.par_link[i] {
                    crate::distribution::link_apply_component(desc.param_supports[i], start.0[i])
                } else {
                    start.0[i]
                }
            })
            .collect();
        model.par_init = Some(init);
    }

    let start_free = match &options.coef_start {
        Some(full) => {
            if full.len() != model.coef_count() {
                return Err(Error::Dimension(format!(
                    "coef_start has length {}, expected {}",
                    full.len(),
                    model.coef_count()
                )));
            }
            structure.reduce(full)
        }
        None => grid_start(&model, &structure, &data, options.lik_skip)?,
    };

    let (opt_free, diag) = {
        let mut raw_objective = make_objective(&model, &structure, &data, options.lik_skip);
        let mut eval_count = 0usize;
        let progress = options.print_progress;
        let mut objective = |x: &[f64]| {
            eval_count += 1;
            let v = raw_objective(x);
            if progress && eval_count % 1000 == 0 {
                eprintln!("  eval {eval_count}: objective {v:.6}");
            }
            v
        };
        if structure.n_free() == 0 {
            let v = objective(&start_free);
            if !v.is_finite() {
                return Err(Error::NonFiniteStart);
            }
            (
                start_free.clone(),
                OptimDiagnostics {
                    evaluations: 1,
                    iterations: 0,
                    converged: true,
                    best_objective: v,
                },
            )
        } else {
            minimize(
                &mut objective,
                &start_free,
                &structure.lower_free,
                &structure.upper_free,
                &options.optim,
            )?
        }
    };

    let full = structure.expand(&opt_free);
    let coef = CoefSet::new(&model, full)?;
    let filter = filter_pass(&model, &coef, &data, options.lik_skip)?;
    let loglik = filter.loglik_sum;

    let (inference, hessian_ok) = if structure.n_free() == 0 {
        let n = structure.n_coef();
        (
            Some(Inference {
                vcov: Mat::zeros(n, n),
                sd: vec![0.0; n],
                z: vec![None; n],
                p: vec![None; n],
                degenerate: false,
            }),
            true,
        )
    } else {
        let mut ll_free = |x: &[f64]| {
            let full = structure.expand(x);
            match CoefSet::new(&model, full)
                .and_then(|c| filter_pass(&model, &c, &data, options.lik_skip))
            {
                Ok(out) => out.loglik_sum,
                Err(_) => f64::NAN,
            }
        };
        match numeric_hessian(&mut ll_free, &opt_free) {
            Some(h) => (Some(infer(&structure, &coef.values, &h)), true),
            None => (None, false),
        }
    };

    let (aic, bic) = info_criteria(loglik, structure.n_free(), filter.n_eff);
    Ok(EstimationResult {
        model,
        data,
        constraints: constraints.clone(),
        structure,
        coef,
        inference,
        filter,
        loglik,
        aic,
        bic,
        optim: OptimSummary {
            evaluations: diag.evaluations,
            iterations: diag.iterations,
            converged: diag.converged,
            start_free,
            hessian_ok,
        },
        options: options.clone(),
    })
}

/// Whether the constraint system pins some time-varying parameter's
/// phi-sum within 1e-8 of one for every admissible free vector (checked
/// at the expansion of the zero free vector, which carries the fixed
/// entries).
fn joint_unit_root_forced(model: &Model, structure: &Structure) -> bool {
    if model.regress != RegressMode::Joint {
        return false;
    }
    let probe = structure.expand(&vec![0.0; structure.n_free()]);
    let view = model.coef_view(&probe);
    model.tv_params().iter().any(|&i| {
        let all_fixed = phi_indices(model, i).iter().all(|&idx| structure.is_fixed(idx));
        let sum: f64 = view.phi(i).iter().sum();
        all_fixed && (1.0 - sum).abs() <= 1e-8
    })
}

fn phi_indices(model: &Model, param: usize) -> Vec<usize> {
    let w = model.wrapped_name(param);
    (1..=model.q[param])
        .map(|j| {
            model
                .coef_labels()
                .iter()
                .position(|l| *l == format!("{w}_phi{j}"))
                .expect("phi label exists")
        })
        .collect()
}
