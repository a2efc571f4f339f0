//! Coefficient uncertainty via bootstrap and time-varying-parameter
//! uncertainty via coefficient-set resampling.
//!
//! Replicates are independent pure tasks keyed by (seed, index) through
//! the splitmix64 stream construction in [`crate::rng`], so results are
//! identical whatever the execution order or thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{filter_pass, CoefSet, Model, SeriesData};
use crate::error::{Error, Result};
use crate::estimation::{estimate_model, EstimationOptions, EstimationResult};
use crate::forecast::simulate_paths;
use crate::linalg;
use crate::matrix::Mat;
use crate::rng::{child_rng, child_seed, rng_from_seed};
use crate::stats::{empirical_quantile, mean, sample_sd};

/// Bootstrap resampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMethod {
    /// Simulate from the fitted model and re-estimate.
    Parametric,
    /// Circular block bootstrap with fixed non-overlapping blocks.
    SimpleBlock,
    /// Circular block bootstrap with fixed overlapping blocks.
    MovingBlock,
    /// Circular block bootstrap with geometric block lengths.
    StationaryBlock,
}

impl BootstrapMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BootstrapMethod::Parametric => "parametric",
            BootstrapMethod::SimpleBlock => "simple_block",
            BootstrapMethod::MovingBlock => "moving_block",
            BootstrapMethod::StationaryBlock => "stationary_block",
        }
    }
}

impl std::str::FromStr for BootstrapMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parametric" => Ok(BootstrapMethod::Parametric),
            "simple_block" => Ok(BootstrapMethod::SimpleBlock),
            "moving_block" => Ok(BootstrapMethod::MovingBlock),
            "stationary_block" => Ok(BootstrapMethod::StationaryBlock),
            other => Err(Error::Usage(format!("unknown bootstrap method `{other}`"))),
        }
    }
}

/// Coefficient samples over successful replicates with their summary
/// statistics.
#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub method: BootstrapMethod,
    /// Successful replicates x coefficients.
    pub coef_samples: Mat,
    pub coef_mean: Vec<f64>,
    pub coef_sd: Vec<f64>,
    /// Requested probabilities and the coefficients x probabilities
    /// quantile table.
    pub coef_quant: (Vec<f64>, Mat),
    pub failures: usize,
}

/// Geometric block length with the given mean, support >= 1.
pub(crate) fn stationary_block_length(rng: &mut impl Rng, mean_length: f64) -> usize {
    let p = (1.0 / mean_length.max(1.0)).min(1.0);
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    1 + (u.ln() / (1.0 - p).ln()).floor() as usize
}

/// Resampling index sequence of length `t` for the block methods.
///
/// `simple_block` samples with replacement from the ceil(t/L) fixed
/// non-overlapping circular blocks; `moving_block` draws uniform circular
/// start positions with fixed length L; `stationary_block` draws
/// geometric lengths with mean L and uniform circular starts. Indices are
/// zero-based.
pub fn block_indices(
    method: BootstrapMethod,
    t: usize,
    block_length: Option<usize>,
    seed: u64,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(Error::Data("cannot resample an empty series".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(t);
    match method {
        BootstrapMethod::Parametric => {
            return Err(Error::spec("the parametric method does not resample indices"))
        }
        BootstrapMethod::SimpleBlock | BootstrapMethod::MovingBlock => {
            let l = block_length
                .ok_or_else(|| Error::spec("the fixed size of blocks must be specified"))?;
            if l < 1 || l > t {
                return Err(Error::spec(format!(
                    "block_length {l} outside 1..={t}"
                )));
            }
            let n_blocks = t.div_ceil(l);
            for _ in 0..n_blocks {
                let start = if method == BootstrapMethod::SimpleBlock {
                    l * rng.gen_range(0..n_blocks)
                } else {
                    rng.gen_range(0..t)
                };
                for offset in 0..l {
                    out.push((start + offset) % t);
                }
            }
        }
        BootstrapMethod::StationaryBlock => {
            let l = block_length
                .ok_or_else(|| Error::spec("the mean size of blocks must be specified"))?;
            if l < 1 {
                return Err(Error::spec("block_length must be at least 1"));
            }
            while out.len() < t {
                let len = stationary_block_length(&mut rng, l as f64);
                let start = rng.gen_range(0..t);
                for offset in 0..len {
                    out.push((start + offset) % t);
                }
            }
        }
    }
    out.truncate(t);
    Ok(out)
}

fn resample_rows(data: &SeriesData, indices: &[usize]) -> SeriesData {
    let y = indices.iter().map(|&i| data.y[i]).collect();
    let x = data
        .x
        .iter()
        .map(|m| {
            if m.ncols() == 0 {
                Mat::zeros(indices.len(), 0)
            } else {
                Mat::from_rows(indices.iter().map(|&i| m.row(i).to_vec()).collect(), m.ncols())
            }
        })
        .collect();
    SeriesData { y, x }
}

fn run_replicate(est: &EstimationResult, method: BootstrapMethod, block_length: Option<usize>, rep_seed: u64) -> Option<Vec<f64>> {
    let data = match method {
        BootstrapMethod::Parametric => {
            let t = est.data.len();
            let sim = crate::forecast::simulate_series(
                &est.model,
                &est.coef,
                t,
                &est.data.x,
                rep_seed,
                0,
            )
            .ok()?;
            SeriesData {
                y: sim.y_sim.into_iter().map(Some).collect(),
                x: est.data.x.clone(),
            }
        }
        _ => {
            let indices = block_indices(method, est.data.len(), block_length, rep_seed).ok()?;
            resample_rows(&est.data, &indices)
        }
    };
    let options = EstimationOptions {
        coef_start: Some(est.coef.values.clone()),
        ..est.options.clone()
    };
    let refit = estimate_model(est.model.clone(), data, &est.constraints, &options).ok()?;
    refit.loglik.is_finite().then_some(refit.coef.values)
}

/// Bootstrap the coefficient uncertainty of an estimated model.
///
/// Replicate r derives its stream from (seed, r); re-estimation starts
/// from the original estimate. Failed replicates are counted, not fatal,
/// unless every replicate fails. `jobs` picks the rayon thread count
/// (`None` = sequential); results are independent of it.
pub fn bootstrap(
    est: &EstimationResult,
    method: BootstrapMethod,
    rep_boot: usize,
    block_length: Option<usize>,
    quant: &[f64],
    seed: u64,
    jobs: Option<usize>,
) -> Result<BootstrapResult> {
    if rep_boot == 0 {
        return Err(Error::spec("rep_boot must be at least 1"));
    }
    let seeds: Vec<u64> = (0..rep_boot as u64).map(|r| child_seed(seed, r)).collect();
    let results: Vec<Option<Vec<f64>>> = match jobs {
        None => seeds.iter().map(|&s| run_replicate(est, method, block_length, s)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Data(format!("thread pool: {e}")))?;
            pool.install(|| {
                seeds
                    .par_iter()
                    .map(|&s| run_replicate(est, method, block_length, s))
                    .collect()
            })
        }
    };

    let k = est.coef.values.len();
    let samples: Vec<Vec<f64>> = results.iter().flatten().cloned().collect();
    let failures = rep_boot - samples.len();
    if samples.is_empty() {
        return Err(Error::Data(format!(
            "all {rep_boot} bootstrap replicates failed to re-estimate"
        )));
    }
    let coef_samples = Mat::from_rows(samples, k);
    let (coef_mean, coef_sd, coef_quant) = summarize_columns(&coef_samples, quant);
    Ok(BootstrapResult {
        method,
        coef_samples,
        coef_mean,
        coef_sd,
        coef_quant: (quant.to_vec(), coef_quant),
        failures,
    })
}

/// Column means, sds, and quantiles of a replicate x coefficient matrix.
fn summarize_columns(samples: &Mat, quant: &[f64]) -> (Vec<f64>, Vec<f64>, Mat) {
    let k = samples.ncols();
    let mut means = Vec::with_capacity(k);
    let mut sds = Vec::with_capacity(k);
    let mut quants = Mat::zeros(k, quant.len());
    for c in 0..k {
        let mut col = samples.col(c);
        means.push(mean(&col));
        sds.push(sample_sd(&col));
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (qi, &p) in quant.iter().enumerate() {
            quants[(c, qi)] = empirical_quantile(&col, p);
        }
    }
    (means, sds, quants)
}

/// Multivariate-normal coefficient draws about the estimate, respecting
/// fixes, ties, and bounds. Draws whose filtered likelihood is not finite
/// are rejected and redrawn (cap 100 * rep_gen attempts).
pub fn coef_draws(est: &EstimationResult, rep_gen: usize, seed: u64) -> Result<Mat> {
    let inference = est
        .inference
        .as_ref()
        .ok_or_else(|| Error::Data("no variance-covariance matrix available".into()))?;
    coef_draws_from(&est.model, &est.data, est, &inference.vcov, rep_gen, seed)
}

fn coef_draws_from(
    model: &Model,
    data: &SeriesData,
    est: &EstimationResult,
    vcov: &Mat,
    rep_gen: usize,
    seed: u64,
) -> Result<Mat> {
    if rep_gen == 0 {
        return Err(Error::spec("rep_gen must be at least 1"));
    }
    let structure = &est.structure;
    let nf = structure.n_free();
    let est_free = structure.reduce(&est.coef.values);

    // Draw in free coordinates; the affine expansion resets fixed and
    // tied entries exactly.
    let mut vf = nalgebra::DMatrix::zeros(nf, nf);
    for (a, &i) in structure.free.iter().enumerate() {
        for (b, &j) in structure.free.iter().enumerate() {
            vf[(a, b)] = vcov[(i, j)];
        }
    }
    let factor = linalg::mvn_factor(&vf);

    let mut rows = Vec::with_capacity(rep_gen);
    let cap = 100 * rep_gen as u64;
    let mut stream = 0u64;
    while rows.len() < rep_gen {
        if stream >= cap {
            return Err(Error::RejectionCap(format!(
                "coefficient draws kept producing non-finite filters ({} attempts)",
                stream
            )));
        }
        let mut rng = child_rng(seed, stream);
        stream += 1;
        let z = nalgebra::DVector::from_iterator(
            nf,
            (0..nf).map(|_| {
                let v: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                v
            }),
        );
        let mut free: Vec<f64> = (&factor * z)
            .iter()
            .zip(&est_free)
            .map(|(d, e)| e + d)
            .collect();
        structure.clamp_free(&mut free);
        let full = structure.expand(&free);
        let coef = CoefSet::new(model, full)?;
        match filter_pass(model, &coef, data, 0) {
            Ok(out) if out.loglik_sum.is_finite() => rows.push(coef.values),
            _ => continue,
        }
    }
    Ok(Mat::from_rows(rows, est.coef.values.len()))
}

/// How coefficient sets for filtered-parameter uncertainty are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterUncertaintyMethod {
    /// Caller-supplied coefficient sets.
    GivenCoefs,
    /// Asymptotic-normal draws about the estimate.
    SimulatedCoefs,
}

impl FilterUncertaintyMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterUncertaintyMethod::GivenCoefs => "given_coefs",
            FilterUncertaintyMethod::SimulatedCoefs => "simulated_coefs",
        }
    }
}

/// Pointwise uncertainty of the time-varying parameter and score paths
/// induced by coefficient uncertainty, in-sample and (optionally) over a
/// simulated forecast horizon.
#[derive(Debug, Clone)]
pub struct FilterUncertainty {
    pub method: FilterUncertaintyMethod,
    pub horizon: usize,
    /// (T+H) x K pointwise statistics.
    pub par_tv_mean: Mat,
    pub par_tv_sd: Mat,
    /// One (T+H) x K surface per requested probability.
    pub par_tv_quant: (Vec<f64>, Vec<Mat>),
    pub score_mean: Mat,
    pub score_sd: Mat,
    pub score_quant: (Vec<f64>, Vec<Mat>),
}

/// Filtered-parameter uncertainty for an estimated model.
///
/// For each coefficient set the filter runs in-sample; when `t_ahead` is
/// positive, each set is extended by `rep_ahead` simulated paths. Means,
/// standard deviations, and empirical quantiles are aggregated pointwise
/// across sets (and simulations).
#[allow(clippy::too_many_arguments)]
pub fn filter_uncertainty(
    est: &EstimationResult,
    method: FilterUncertaintyMethod,
    coef_set: Option<&Mat>,
    rep_gen: usize,
    t_ahead: usize,
    x_ahead: &[Mat],
    rep_ahead: usize,
    quant: &[f64],
    seed: u64,
) -> Result<FilterUncertainty> {
    let model = &est.model;
    let k = model.param_count();
    let t_len = est.data.len();

    let sets: Mat = match method {
        FilterUncertaintyMethod::GivenCoefs => {
            let m = coef_set.ok_or_else(|| {
                Error::spec("given_coefs requires a non-empty coefficient matrix")
            })?;
            if m.nrows() == 0 {
                return Err(Error::spec("given_coefs requires a non-empty coefficient matrix"));
            }
            if m.ncols() != est.coef.values.len() {
                return Err(Error::Dimension(format!(
                    "coefficient sets have {} columns, expected {}",
                    m.ncols(),
                    est.coef.values.len()
                )));
            }
            m.clone()
        }
        FilterUncertaintyMethod::SimulatedCoefs => {
            coef_draws(est, rep_gen, child_seed(seed, 0))?
        }
    };

    // Per (t, k) cell: one value per set in-sample, rep_ahead values per
    // set over the horizon.
    let n_sets = sets.nrows();
    let total = t_len + t_ahead;
    let mut par_values: Vec<Vec<f64>> = vec![Vec::new(); total * k];
    let mut score_values: Vec<Vec<f64>> = vec![Vec::new(); total * k];

    for s in 0..n_sets {
        let coef = CoefSet::new(model, sets.row(s).to_vec())?;
        let filter = filter_pass(model, &coef, &est.data, 0)?;
        if let Some(t) = filter.failed_at {
            return Err(Error::NonFiniteFilter(t));
        }
        for t in 0..t_len {
            for c in 0..k {
                par_values[t * k + c].push(filter.par_tv[(t, c)]);
                score_values[t * k + c].push(filter.score_tv[(t, c)]);
            }
        }
        if t_ahead > 0 {
            let tail = filter.tail(model);
            let paths = simulate_paths(
                model,
                &coef,
                &tail,
                t_ahead,
                x_ahead,
                rep_ahead,
                child_seed(child_seed(seed, 1), s as u64),
            )?;
            for path in &paths {
                for h in 0..t_ahead {
                    for c in 0..k {
                        par_values[(t_len + h) * k + c].push(path.par[(h, c)]);
                        score_values[(t_len + h) * k + c].push(path.score[(h, c)]);
                    }
                }
            }
        }
    }

    let aggregate = |values: &mut [Vec<f64>]| {
        let mut mean_m = Mat::zeros(total, k);
        let mut sd_m = Mat::zeros(total, k);
        let mut quant_m: Vec<Mat> = quant.iter().map(|_| Mat::zeros(total, k)).collect();
        for t in 0..total {
            for c in 0..k {
                let cell = &mut values[t * k + c];
                mean_m[(t, c)] = mean(cell);
                sd_m[(t, c)] = sample_sd(cell);
                cell.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (qi, &p) in quant.iter().enumerate() {
                    quant_m[qi][(t, c)] = empirical_quantile(cell, p);
                }
            }
        }
        (mean_m, sd_m, quant_m)
    };

    let (par_tv_mean, par_tv_sd, par_q) = aggregate(&mut par_values);
    let (score_mean, score_sd, score_q) = aggregate(&mut score_values);

    Ok(FilterUncertainty {
        method,
        horizon: t_ahead,
        par_tv_mean,
        par_tv_sd,
        par_tv_quant: (quant.to_vec(), par_q),
        score_mean,
        score_sd,
        score_quant: (quant.to_vec(), score_q),
    })
}
