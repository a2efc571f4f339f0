//! Forecasting by zero-score mean paths or simulated paths, and
//! unconditional model simulation.

use rand::RngCore;

use crate::dynamics::{
    eval_step, filter_pass, init_vector, natural_checked, CoefSet, Model, Recursion,
    RecursionTail, SeriesData,
};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rng::child_rng;
use crate::stats::{empirical_quantile, mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastMethod {
    MeanPath,
    SimulatedPaths,
}

impl ForecastMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ForecastMethod::MeanPath => "mean_path",
            ForecastMethod::SimulatedPaths => "simulated_paths",
        }
    }
}

/// Forecast of the observation mean (and, for simulated paths, its
/// spread) over horizons T+1..T+H.
#[derive(Debug, Clone)]
pub struct ForecastResult {
    pub method: ForecastMethod,
    pub horizon: usize,
    pub y_mean: Vec<f64>,
    pub y_sd: Option<Vec<f64>>,
    /// Requested probabilities and the H x len(probs) quantile surface.
    pub y_quant: Option<(Vec<f64>, Mat)>,
    /// H x K link-space parameter paths (mean across simulations for the
    /// simulated-paths method).
    pub par_tv_ahead: Mat,
}

/// A simulated series with the parameter and score paths that produced it.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub y_sim: Vec<f64>,
    pub par_tv_sim: Mat,
    pub score_sim: Mat,
}

fn validate_x_ahead(model: &Model, t_ahead: usize, x_ahead: &[Mat]) -> Result<()> {
    for i in 0..model.param_count() {
        let need = model.m[i];
        let got = x_ahead.get(i).map_or(0, Mat::ncols);
        if need != got {
            return Err(Error::Dimension(format!(
                "parameter {i} declares {need} regressors but x_ahead supplies {got}; \
                 regressor values must be provided for the forecast period"
            )));
        }
        if need > 0 && x_ahead[i].nrows() < t_ahead {
            return Err(Error::Dimension(format!(
                "x_ahead for parameter {i} has {} rows, need {t_ahead}",
                x_ahead[i].nrows()
            )));
        }
    }
    Ok(())
}

fn reg_row(model: &Model, coef: &CoefSet, x: &[Mat], t: usize) -> Vec<f64> {
    let view = model.coef_view(&coef.values);
    (0..model.param_count())
        .map(|i| {
            let row: &[f64] = match x.get(i) {
                Some(m) if m.ncols() > 0 => m.row(t),
                _ => &[],
            };
            view.regression_term(i, row)
        })
        .collect()
}

/// Continue the recursion past the sample with all forecast-period scores
/// set to zero, reporting the implied conditional means.
pub fn forecast_mean_path(
    model: &Model,
    coef: &CoefSet,
    data: &SeriesData,
    t_ahead: usize,
    x_ahead: &[Mat],
) -> Result<ForecastResult> {
    validate_x_ahead(model, t_ahead, x_ahead)?;
    let filter = filter_pass(model, coef, data, 0)?;
    if let Some(t) = filter.failed_at {
        return Err(Error::NonFiniteFilter(t));
    }
    let k = model.param_count();
    let tail = filter.tail(model);
    let mut rec = Recursion::from_tail(model, &coef.values, &tail);
    let mut y_mean = Vec::with_capacity(t_ahead);
    let mut par = Mat::zeros(t_ahead, k);
    let zero = vec![0.0; k];
    for h in 0..t_ahead {
        let reg = reg_row(model, coef, x_ahead, h);
        let f_row = rec.push_row(&reg).to_vec();
        let natural = natural_checked(model, &f_row)
            .ok_or(Error::NonFiniteFilter(data.len() + h))?;
        y_mean.push(model.dist.mean(&natural));
        par.row_mut(h).copy_from_slice(&f_row);
        rec.set_score(&zero);
    }
    Ok(ForecastResult {
        method: ForecastMethod::MeanPath,
        horizon: t_ahead,
        y_mean,
        y_sd: None,
        y_quant: None,
        par_tv_ahead: par,
    })
}

/// One simulated continuation of a recursion: draws, parameter rows, and
/// scaled scores per horizon.
pub(crate) struct PathSim {
    pub y: Vec<f64>,
    pub par: Mat,
    pub score: Mat,
}

/// Draw -> score -> advance for `t_ahead` steps from a recursion tail.
/// Returns `None` if the path leaves the parameter support.
pub(crate) fn continue_with_draws(
    model: &Model,
    coef: &CoefSet,
    tail: &RecursionTail,
    t_ahead: usize,
    x_ahead: &[Mat],
    rng: &mut dyn RngCore,
) -> Option<PathSim> {
    let k = model.param_count();
    let mut rec = Recursion::from_tail(model, &coef.values, tail);
    let mut y = Vec::with_capacity(t_ahead);
    let mut par = Mat::zeros(t_ahead, k);
    let mut score = Mat::zeros(t_ahead, k);
    for h in 0..t_ahead {
        let reg = reg_row(model, coef, x_ahead, h);
        let f_row = rec.push_row(&reg).to_vec();
        let natural = natural_checked(model, &f_row)?;
        let draw = model.dist.sample(&natural, rng);
        let step = eval_step(model, &natural, draw)?;
        y.push(draw);
        par.row_mut(h).copy_from_slice(&f_row);
        score.row_mut(h).copy_from_slice(&step.scaled_score);
        rec.set_score(&step.scaled_score);
    }
    Some(PathSim { y, par, score })
}

/// Run `rep` independent simulated continuations, redrawing failed paths
/// on fresh streams up to `100 * rep` total attempts.
pub(crate) fn simulate_paths(
    model: &Model,
    coef: &CoefSet,
    tail: &RecursionTail,
    t_ahead: usize,
    x_ahead: &[Mat],
    rep: usize,
    seed: u64,
) -> Result<Vec<PathSim>> {
    let mut paths = Vec::with_capacity(rep);
    let mut stream = 0u64;
    let cap = 100 * rep.max(1) as u64;
    for _ in 0..rep {
        loop {
            if stream >= cap {
                return Err(Error::RejectionCap(format!(
                    "{} of {} simulated paths failed; the coefficient region is unstable",
                    stream as usize - paths.len(),
                    stream
                )));
            }
            let mut rng = child_rng(seed, stream);
            stream += 1;
            if let Some(path) = continue_with_draws(model, coef, tail, t_ahead, x_ahead, &mut rng)
            {
                paths.push(path);
                break;
            }
        }
    }
    Ok(paths)
}

/// Forecast by repeated simulation: draw an observation at each step,
/// feed its scaled score back into the recursion, and aggregate the
/// pointwise mean, standard deviation, and empirical quantiles.
pub fn forecast_simulated_paths(
    model: &Model,
    coef: &CoefSet,
    data: &SeriesData,
    t_ahead: usize,
    x_ahead: &[Mat],
    rep_ahead: usize,
    quant: &[f64],
    seed: u64,
) -> Result<ForecastResult> {
    if rep_ahead == 0 {
        return Err(Error::spec("rep_ahead must be at least 1"));
    }
    validate_x_ahead(model, t_ahead, x_ahead)?;
    let filter = filter_pass(model, coef, data, 0)?;
    if let Some(t) = filter.failed_at {
        return Err(Error::NonFiniteFilter(t));
    }
    let tail = filter.tail(model);
    let paths = simulate_paths(model, coef, &tail, t_ahead, x_ahead, rep_ahead, seed)?;

    let k = model.param_count();
    let mut y_mean = Vec::with_capacity(t_ahead);
    let mut y_sd = Vec::with_capacity(t_ahead);
    let mut y_quant = Mat::zeros(t_ahead, quant.len());
    let mut par = Mat::zeros(t_ahead, k);
    for h in 0..t_ahead {
        let mut draws: Vec<f64> = paths.iter().map(|p| p.y[h]).collect();
        y_mean.push(mean(&draws));
        y_sd.push(sample_sd(&draws));
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (qi, &p) in quant.iter().enumerate() {
            y_quant[(h, qi)] = empirical_quantile(&draws, p);
        }
        for c in 0..k {
            let vals: Vec<f64> = paths.iter().map(|p| p.par[(h, c)]).collect();
            par[(h, c)] = mean(&vals);
        }
    }
    Ok(ForecastResult {
        method: ForecastMethod::SimulatedPaths,
        horizon: t_ahead,
        y_mean,
        y_sd: Some(y_sd),
        y_quant: Some((quant.to_vec(), y_quant)),
        par_tv_ahead: par,
    })
}

/// Simulate a series from scratch: initialize at `par_init` or the
/// long-term value, then draw -> score -> advance, discarding `burn_in`
/// initial steps. Filtering the output with the same coefficients
/// reproduces `par_tv_sim` exactly.
pub fn simulate_series(
    model: &Model,
    coef: &CoefSet,
    t_sim: usize,
    x_sim: &[Mat],
    seed: u64,
    burn_in: usize,
) -> Result<SimulationResult> {
    let k = model.param_count();
    let total = burn_in + t_sim;

    // Burn-in reuses the first regressor row when x covers only t_sim.
    let x_total: Vec<Mat> = (0..model.param_count())
        .map(|i| {
            let m = model.m[i];
            if m == 0 {
                return Ok(Mat::zeros(total, 0));
            }
            let x = x_sim.get(i).ok_or_else(|| {
                Error::Dimension(format!("parameter {i} declares {m} regressors but x_sim is missing"))
            })?;
            if x.ncols() != m {
                return Err(Error::Dimension(format!(
                    "x_sim for parameter {i} has {} columns, expected {m}",
                    x.ncols()
                )));
            }
            if x.nrows() == total {
                Ok(x.clone())
            } else if x.nrows() == t_sim {
                let mut rows = Vec::with_capacity(total);
                for _ in 0..burn_in {
                    rows.push(x.row(0).to_vec());
                }
                for r in 0..t_sim {
                    rows.push(x.row(r).to_vec());
                }
                Ok(Mat::from_rows(rows, m))
            } else {
                Err(Error::Dimension(format!(
                    "x_sim for parameter {i} has {} rows, expected {t_sim} or {total}",
                    x.nrows()
                )))
            }
        })
        .collect::<Result<_>>()?;

    if t_sim == 0 {
        return Ok(SimulationResult {
            y_sim: Vec::new(),
            par_tv_sim: Mat::zeros(0, k),
            score_sim: Mat::zeros(0, k),
        });
    }

    let x_means: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let x = &x_total[i];
            (0..x.ncols()).map(|c| mean(&x.col(c))).collect()
        })
        .collect();
    let init = init_vector(model, coef, &x_means)?;

    let mut rng = child_rng(seed, 0);
    let mut rec = Recursion::new(model, &coef.values, init, total);
    let mut y_all = Vec::with_capacity(total);
    let mut par_all = Mat::zeros(total, k);
    let mut score_all = Mat::zeros(total, k);
    for t in 0..total {
        let reg = reg_row(model, coef, &x_total, t);
        let f_row = rec.push_row(&reg).to_vec();
        let natural =
            natural_checked(model, &f_row).ok_or(Error::NonFiniteFilter(t))?;
        let draw = model.dist.sample(&natural, &mut rng);
        let step = eval_step(model, &natural, draw).ok_or(Error::NonFiniteFilter(t))?;
        y_all.push(draw);
        par_all.row_mut(t).copy_from_slice(&f_row);
        score_all.row_mut(t).copy_from_slice(&step.scaled_score);
        rec.set_score(&step.scaled_score);
    }

    let mut y_sim = Vec::with_capacity(t_sim);
    let mut par_tv_sim = Mat::zeros(t_sim, k);
    let mut score_sim = Mat::zeros(t_sim, k);
    for t in 0..t_sim {
        y_sim.push(y_all[burn_in + t]);
        par_tv_sim.row_mut(t).copy_from_slice(par_all.row(burn_in + t));
        score_sim.row_mut(t).copy_from_slice(score_all.row(burn_in + t));
    }
    Ok(SimulationResult { y_sim, par_tv_sim, score_sim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::registry;
    use crate::dynamics::ModelSpec;
    use approx::assert_relative_eq;

    fn model_and_coef(values: Vec<f64>, spec: ModelSpec) -> (Model, CoefSet) {
        let model = Model::from_spec(&spec, registry()).unwrap();
        let coef = CoefSet::new(&model, values).unwrap();
        (model, coef)
    }

    #[test]
    fn constant_model_forecasts_its_mean() {
        let (model, coef) = model_and_coef(vec![1.0, 0.0, 0.0], ModelSpec::new("pois"));
        let data = SeriesData::univariate(vec![Some(2.0), Some(3.0)]);
        let fc = forecast_mean_path(&model, &coef, &data, 4, &[]).unwrap();
        for h in 0..4 {
            assert_relative_eq!(fc.y_mean[h], 1.0_f64.exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_horizon_is_empty() {
        let (model, coef) = model_and_coef(vec![1.0, 0.0, 0.0], ModelSpec::new("pois"));
        let data = SeriesData::univariate(vec![Some(2.0)]);
        let fc = forecast_mean_path(&model, &coef, &data, 0, &[]).unwrap();
        assert!(fc.y_mean.is_empty());
        assert_eq!(fc.par_tv_ahead.nrows(), 0);
    }

    #[test]
    fn zero_score_continuation_arithmetic() {
        // alpha = 0 so the forecast recursion is f_{T+h} = 0.2 + 0.9 f_{T+h-1}.
        let (model, coef) = model_and_coef(vec![0.2, 0.0, 0.9], ModelSpec::new("pois"));
        // One observation; with alpha = 0 the in-sample path stays at
        // f_bar = 2; craft f_T = 1.5 via par_init.
        let spec = ModelSpec::new("pois").par_init(vec![1.5]);
        let model_init = Model::from_spec(&spec, registry()).unwrap();
        let coef_init = CoefSet::new(&model_init, coef.values.clone()).unwrap();
        let data = SeriesData::univariate(vec![Some(3.0)]);
        let fc = forecast_mean_path(&model_init, &coef_init, &data, 2, &[]).unwrap();
        assert_relative_eq!(fc.par_tv_ahead[(0, 0)], 1.55, epsilon = 1e-12);
        assert_relative_eq!(fc.par_tv_ahead[(1, 0)], 1.595, epsilon = 1e-12);
        assert_relative_eq!(fc.y_mean[0], 1.55_f64.exp(), epsilon = 1e-12);
        let _ = model;
    }

    #[test]
    fn missing_x_ahead_is_an_error() {
        let spec = ModelSpec::new("pois").regressors(1);
        let model = Model::from_spec(&spec, registry()).unwrap();
        let coef = CoefSet::new(&model, vec![0.2, 0.5, 0.1, 0.5]).unwrap();
        let x = Mat::from_rows(vec![vec![1.0], vec![0.0]], 1);
        let data = SeriesData::with_common_x(vec![Some(2.0), Some(3.0)], x, &model);
        assert!(forecast_mean_path(&model, &coef, &data, 2, &[]).is_err());
    }

    #[test]
    fn simulated_static_model_matches_analytic_mean() {
        let (model, coef) =
            model_and_coef(vec![1.2, 0.0, 0.0], ModelSpec::new("pois"));
        let data = SeriesData::univariate(vec![Some(3.0), Some(4.0)]);
        let rep = 4000;
        let fc = forecast_simulated_paths(
            &model, &coef, &data, 3, &[], rep, &[0.025, 0.975], 7,
        )
        .unwrap();
        let lambda = 1.2_f64.exp();
        let se = (lambda / rep as f64).sqrt();
        for h in 0..3 {
            assert!((fc.y_mean[h] - lambda).abs() < 4.0 * se);
        }
        let (probs, quant) = fc.y_quant.as_ref().unwrap();
        assert_eq!(probs.len(), 2);
        for h in 0..3 {
            assert!(quant[(h, 0)] <= quant[(h, 1)]);
        }
    }

    #[test]
    fn single_path_quantiles_equal_the_path() {
        let (model, coef) = model_and_coef(vec![1.0, 0.1, 0.5], ModelSpec::new("pois"));
        let data = SeriesData::univariate(vec![Some(2.0), Some(4.0)]);
        let fc =
            forecast_simulated_paths(&model, &coef, &data, 3, &[], 1, &[0.1, 0.9], 11).unwrap();
        let (_, quant) = fc.y_quant.as_ref().unwrap();
        for h in 0..3 {
            assert_eq!(quant[(h, 0)], quant[(h, 1)]);
            assert_eq!(quant[(h, 0)], fc.y_mean[h]);
            assert_eq!(fc.y_sd.as_ref().unwrap()[h], 0.0);
        }
    }

    #[test]
    fn degenerate_bernoulli_paths_are_all_ones() {
        let spec = ModelSpec::new("bernoulli");
        let model = Model::from_spec(&spec, registry()).unwrap();
        // logit(p) = 36 puts p within 1e-15 of 1.
        let coef = CoefSet::new(&model, vec![36.0, 0.0, 0.0]).unwrap();
        let data = SeriesData::univariate(vec![Some(1.0), Some(1.0)]);
        let fc =
            forecast_simulated_paths(&model, &coef, &data, 4, &[], 64, &[0.5], 3).unwrap();
        for h in 0..4 {
            assert_eq!(fc.y_mean[h], 1.0);
        }
    }

    #[test]
    fn empty_simulation() {
        let (model, coef) = model_and_coef(vec![0.5, 0.1, 0.5], ModelSpec::new("pois"));
        let sim = simulate_series(&model, &coef, 0, &[], 1, 0).unwrap();
        assert!(sim.y_sim.is_empty());
        assert_eq!(sim.par_tv_sim.nrows(), 0);
    }

    #[test]
    fn filtering_a_simulation_reproduces_parameters_exactly() {
        let (model, coef) =
            model_and_coef(vec![0.1, 0.08, 0.85], ModelSpec::new("pois"));
        let sim = simulate_series(&model, &coef, 500, &[], 42, 0).unwrap();
        let data = SeriesData::univariate(sim.y_sim.iter().map(|&v| Some(v)).collect());
        let filt = filter_pass(&model, &coef, &data, 0).unwrap();
        for t in 0..500 {
            assert_eq!(filt.par_tv[(t, 0)], sim.par_tv_sim[(t, 0)]);
            assert_eq!(filt.score_tv[(t, 0)], sim.score_sim[(t, 0)]);
        }
    }

    #[test]
    fn simulation_is_deterministic_under_seed() {
        let (model, coef) =
            model_and_coef(vec![0.1, 0.08, 0.85], ModelSpec::new("pois"));
        let a = simulate_series(&model, &coef, 50, &[], 9, 0).unwrap();
        let b = simulate_series(&model, &coef, 50, &[], 9, 0).unwrap();
        assert_eq!(a.y_sim, b.y_sim);
        let c = simulate_series(&model, &coef, 50, &[], 10, 0).unwrap();
        assert_ne!(a.y_sim, c.y_sim);
    }

    #[test]
    fn burn_in_drops_initial_rows() {
        let (model, coef) =
            model_and_coef(vec![0.1, 0.08, 0.85], ModelSpec::new("pois"));
        let with = simulate_series(&model, &coef, 20, &[], 5, 30).unwrap();
        assert_eq!(with.y_sim.len(), 20);
        // Burn-in shifts the stream, so the draws differ from burn_in = 0.
        let without = simulate_series(&model, &coef, 20, &[], 5, 0).unwrap();
        assert_ne!(with.y_sim, without.y_sim);
    }
}
