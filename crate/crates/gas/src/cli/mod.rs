//! Command-line front end: subcommand dispatch, config/flag resolution,
//! and result emission.
//!
//! Subcommands: `estimate`, `forecast`, `simulate`, `bootstrap`,
//! `filter`, `distr`. Exit codes: 0 success, 1 usage error, 2
//! computation failure.

pub mod config;
pub mod data;
pub mod output;

use std::path::{Path, PathBuf};

use crate::distribution::{list_distributions, DataType};
use crate::dynamics::{CoefSet, Model, SeriesData};
use crate::error::{Error, Result};
use crate::estimation::{
    coef_index, estimate, ConstraintSpec, EstimationOptions, EstimationResult, OptimOptions,
};
use crate::forecast::{forecast_mean_path, forecast_simulated_paths, simulate_series};
use crate::matrix::Mat;
use crate::uncertainty::{bootstrap, filter_uncertainty, BootstrapMethod, FilterUncertaintyMethod};

use config::RunConfig;
use data::{parse_data, DataTable};
use output::ResultDoc;

const USAGE: &str = "usage: gas <estimate|forecast|simulate|bootstrap|filter|distr> \
[--data FILE] [--config FILE] [--out FILE] [--seed N] [--jobs N] [--progress] \
[--emit-samples] [--t-sim N] [--t-ahead N] [--method NAME] [--rep N] \
[--type TYPE] [--default-only]";

#[derive(Debug, Default)]
struct Flags {
    data: Option<PathBuf>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
    progress: bool,
    emit_samples: bool,
    t_sim: Option<usize>,
    t_ahead: Option<usize>,
    method: Option<String>,
    rep: Option<usize>,
    filter_type: Option<String>,
    default_only: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags> {
    let mut flags = Flags::default();
    let mut it = args.iter().peekable();
    let mut value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>,
                     flag: &str|
     -> Result<String> {
        it.next()
            .cloned()
            .ok_or_else(|| Error::Usage(format!("flag `{flag}` needs a value")))
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--data" => flags.data = Some(PathBuf::from(value(&mut it, "--data")?)),
            "--config" => flags.config = Some(PathBuf::from(value(&mut it, "--config")?)),
            "--out" => flags.out = Some(PathBuf::from(value(&mut it, "--out")?)),
            "--seed" => {
                flags.seed = Some(parse_int(&value(&mut it, "--seed")?, "--seed")?)
            }
            "--jobs" => {
                flags.jobs = Some(parse_int(&value(&mut it, "--jobs")?, "--jobs")? as usize)
            }
            "--progress" => flags.progress = true,
            "--emit-samples" => flags.emit_samples = true,
            "--t-sim" => {
                flags.t_sim = Some(parse_int(&value(&mut it, "--t-sim")?, "--t-sim")? as usize)
            }
            "--t-ahead" => {
                flags.t_ahead =
                    Some(parse_int(&value(&mut it, "--t-ahead")?, "--t-ahead")? as usize)
            }
            "--method" => flags.method = Some(value(&mut it, "--method")?),
            "--rep" => flags.rep = Some(parse_int(&value(&mut it, "--rep")?, "--rep")? as usize),
            "--type" => flags.filter_type = Some(value(&mut it, "--type")?),
            "--default-only" => flags.default_only = true,
            other => return Err(Error::Usage(format!("unknown flag `{other}`"))),
        }
    }
    Ok(flags)
}

fn parse_int(s: &str, flag: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| Error::Usage(format!("flag `{flag}` expects an integer, got `{s}`")))
}

struct Failure {
    code: i32,
    message: String,
}

fn usage_phase<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure { code: 1, message: e.to_string() })
}

fn compute_phase<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| {
        let code = match e {
            Error::Usage(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    })
}

/// Run the command line given `argv` without the program name; returns
/// the process exit code.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let args: Vec<String> = argv.into_iter().collect();
    match dispatch(&args) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(args: &[String]) -> std::result::Result<(), Failure> {
    let Some(sub) = args.first() else {
        return Err(Failure { code: 1, message: USAGE.to_string() });
    };
    let flags = usage_phase(parse_flags(&args[1..]))?;
    match sub.as_str() {
        "estimate" => cmd_estimate(&flags),
        "forecast" => cmd_forecast(&flags),
        "simulate" => cmd_simulate(&flags),
        "bootstrap" => cmd_bootstrap(&flags),
        "filter" => cmd_filter(&flags),
        "distr" => cmd_distr(&flags),
        other => Err(Failure {
            code: 1,
            message: format!("unknown subcommand `{other}`; {USAGE}"),
        }),
    }
}

fn load_config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &flags.data {
        cfg.io.data = Some(d.display().to_string());
    }
    if let Some(o) = &flags.out {
        cfg.io.out = Some(o.display().to_string());
    }
    if let Some(s) = flags.seed {
        cfg.task.seed = s;
    }
    if let Some(j) = flags.jobs {
        cfg.task.jobs = Some(j);
    }
    if flags.progress {
        cfg.task.progress = true;
    }
    if flags.emit_samples {
        cfg.task.emit_samples = true;
    }
    if let Some(t) = flags.t_sim {
        cfg.task.t_sim = t;
    }
    if let Some(t) = flags.t_ahead {
        cfg.task.t_ahead = t;
    }
    if let Some(m) = &flags.method {
        cfg.task.method = Some(m.clone());
    }
    if let Some(r) = flags.rep {
        cfg.task.rep_boot = r;
        cfg.task.rep_ahead = r;
        cfg.task.rep_gen = r;
    }
    Ok(cfg)
}

fn load_table(cfg: &RunConfig) -> Result<DataTable> {
    let path = cfg
        .io
        .data
        .as_ref()
        .ok_or_else(|| Error::Usage("no data file: pass --data or set io.data".into()))?;
    parse_data(Path::new(path))
}

fn y_column_name(cfg: &RunConfig, table: &DataTable) -> Result<String> {
    if let Some(name) = &cfg.io.y {
        return Ok(name.clone());
    }
    if table.headers.iter().any(|h| h == "y") {
        return Ok("y".to_string());
    }
    let non_time: Vec<&String> = table
        .headers
        .iter()
        .filter(|h| Some(h.as_str()) != cfg.io.time.as_deref() && h.as_str() != "t")
        .collect();
    if non_time.len() == 1 {
        return Ok(non_time[0].clone());
    }
    Err(Error::Usage(
        "cannot infer the observation column: set io.y in the config".into(),
    ))
}

fn x_matrix(cfg: &RunConfig, table: &DataTable) -> Result<Option<Mat>> {
    if cfg.io.x.is_empty() {
        return Ok(None);
    }
    let mut rows = vec![Vec::with_capacity(cfg.io.x.len()); table.nrows()];
    for name in &cfg.io.x {
        let col = table.numeric_column(name)?;
        for (r, v) in col.into_iter().enumerate() {
            let v = v.ok_or_else(|| {
                Error::Data(format!(
                    "regressor column `{name}` has a missing value at row {}",
                    r + 2
                ))
            })?;
            rows[r].push(v);
        }
    }
    Ok(Some(Mat::from_rows(rows, cfg.io.x.len())))
}

/// Model spec + series from config and data, with regressor counts
/// inferred from the column mapping.
fn build_inputs(cfg: &RunConfig, table: &DataTable) -> Result<(Model, SeriesData)> {
    let mut spec = cfg.model_spec()?.clone();
    let x = x_matrix(cfg, table)?;
    if spec.m.is_none() {
        if let Some(xm) = &x {
            spec = spec.regressors(xm.ncols());
        }
    }
    let model = Model::from_spec(&spec, crate::distribution::registry())?;
    let y_name = y_column_name(cfg, table)?;
    let y = table.numeric_column(&y_name)?;
    let series = match x {
        Some(xm) => SeriesData::with_common_x(y, xm, &model),
        None => SeriesData::univariate(y),
    };
    series.validate(&model)?;
    Ok((model, series))
}

/// Lower the name-keyed constraint config onto the dense representation.
fn lower_constraints(model: &Model, cc: &config::ConstraintConfig) -> Result<ConstraintSpec> {
    let n = model.coef_count();
    let mut spec = ConstraintSpec::none();
    spec.special = cc.special.clone();
    if !cc.fix.is_empty() || !cc.ties.is_empty() {
        spec.fix_value = vec![None; n];
        for (name, value) in &cc.fix {
            spec.fix_value[coef_index(model, name)?] = Some(*value);
        }
    }
    if !cc.ties.is_empty() {
        spec.fix_other = vec![vec![None; n]; n];
        for tie in &cc.ties {
            let row = coef_index(model, &tie.fixed)?;
            let col = coef_index(model, &tie.on)?;
            if spec.fix_value[row].is_none() {
                spec.fix_value[row] = Some(0.0);
            }
            spec.fix_other[row][col] = Some(tie.mult);
        }
    }
    if !cc.lower.is_empty() {
        spec.lower = vec![None; n];
        for (name, value) in &cc.lower {
            spec.lower[coef_index(model, name)?] = Some(*value);
        }
    }
    if !cc.upper.is_empty() {
        spec.upper = vec![None; n];
        for (name, value) in &cc.upper {
            spec.upper[coef_index(model, name)?] = Some(*value);
        }
    }
    Ok(spec)
}

fn estimation_options(cfg: &RunConfig) -> EstimationOptions {
    EstimationOptions {
        lik_skip: cfg.estimation.lik_skip,
        coef_start: cfg.estimation.coef_start.clone(),
        optim: OptimOptions {
            max_evals: cfg.estimation.max_evals,
            diameter_tol: cfg.estimation.diameter_tol,
        },
        print_progress: cfg.task.progress,
    }
}

/// Constraints fixing every coefficient at the given values (used when a
/// task is driven by supplied coefficients instead of an estimation).
fn fix_all(model: &Model, values: &[f64]) -> Result<ConstraintSpec> {
    if values.len() != model.coef_count() {
        return Err(Error::Dimension(format!(
            "coef_est has length {}, expected {}",
            values.len(),
            model.coef_count()
        )));
    }
    let mut spec = ConstraintSpec::none();
    spec.fix_value = values.iter().map(|&v| Some(v)).collect();
    Ok(spec)
}

/// Estimate, honoring task.coef_est by pinning every coefficient.
fn estimate_for_task(cfg: &RunConfig, model: &Model, series: &SeriesData) -> Result<EstimationResult> {
    let spec = cfg.model_spec()?;
    let constraints = match &cfg.task.coef_est {
        Some(values) => fix_all(model, values)?,
        None => lower_constraints(model, &cfg.constraints)?,
    };
    estimate(series, spec, &constraints, &estimation_options(cfg))
}

fn write_doc(cfg: &RunConfig, doc: &ResultDoc) -> Result<()> {
    if let Some(out) = &cfg.io.out {
        output::write_results(doc, Path::new(out))?;
    }
    Ok(())
}

fn load_x_ahead(cfg: &RunConfig, model: &Model, t_ahead: usize) -> Result<Vec<Mat>> {
    if model.m.iter().all(|&m| m == 0) || t_ahead == 0 {
        return Ok(Vec::new());
    }
    let path = cfg.task.x_ahead_data.as_ref().ok_or_else(|| {
        Error::Usage(
            "the model uses regressors: set task.x_ahead_data to a CSV with their future values"
                .into(),
        )
    })?;
    let table = parse_data(Path::new(path))?;
    let x = x_matrix(cfg, &table)?
        .ok_or_else(|| Error::Usage("io.x must name the regressor columns".into()))?;
    Ok((0..model.param_count())
        .map(|i| if model.m[i] > 0 { x.clone() } else { Mat::zeros(t_ahead, 0) })
        .collect())
}

fn cmd_estimate(flags: &Flags) -> std::result::Result<(), Failure> {
    let cfg = usage_phase(load_config(flags))?;
    let table = usage_phase(load_table(&cfg))?;
    let (model, series) = usage_phase(build_inputs(&cfg, &table))?;
    let constraints = usage_phase(lower_constraints(&model, &cfg.constraints))?;
    let spec = usage_phase(cfg.model_spec().cloned())?;

    let est = compute_phase(estimate(&series, &spec, &constraints, &estimation_options(&cfg)))?;
    let mut stdout = std::io::stdout();
    output::print_estimate_summary(&est, &mut stdout).ok();
    let doc = output::estimation_doc(&est, cfg.task.emit_samples, Some(cfg.task.seed));
    compute_phase(write_doc(&cfg, &doc))?;
    Ok(())
}

fn cmd_forecast(flags: &Flags) -> std::result::Result<(), Failure> {
    let cfg = usage_phase(load_config(flags))?;
    let table = usage_phase(load_table(&cfg))?;
    let (model, series) = usage_phase(build_inputs(&cfg, &table))?;
    let t_ahead = cfg.task.t_ahead;
    let x_ahead = usage_phase(load_x_ahead(&cfg, &model, t_ahead))?;
    let method = cfg.task.method.as_deref().unwrap_or("mean_path");

    let est = compute_phase(estimate_for_task(&cfg, &model, &series))?;
    let fc = compute_phase(match method {
        "mean_path" => forecast_mean_path(&est.model, &est.coef, &series, t_ahead, &x_ahead),
        "simulated_paths" => forecast_simulated_paths(
            &est.model,
            &est.coef,
            &series,
            t_ahead,
            &x_ahead,
            cfg.task.rep_ahead,
            &cfg.task.quant,
            cfg.task.seed,
        ),
        other => Err(Error::Usage(format!("unknown forecast method `{other}`"))),
    })?;

    println!("Forecast ({method}), horizon {t_ahead}");
    let show = t_ahead.min(5);
    for h in 0..show {
        println!("  t+{}: mean {:.7}", h + 1, fc.y_mean[h]);
    }
    if t_ahead > show {
        println!("  ... ({} more rows)", t_ahead - show);
    }
    let doc = output::forecast_doc(&est.model, &fc, series.len(), Some(cfg.task.seed));
    compute_phase(write_doc(&cfg, &doc))?;
    Ok(())
}

fn cmd_simulate(flags: &Flags) -> std::result::Result<(), Failure> {
    let cfg = usage_phase(load_config(flags))?;
    let spec = usage_phase(cfg.model_spec().cloned())?;
    let coef_values = usage_phase(cfg.task.coef_est.clone().ok_or_else(|| {
        Error::Usage("simulate needs task.coef_est with the coefficient values".into())
    }))?;

    // Optional regressors for the simulation sample.
    let (model, x_sim) = {
        let mut spec = spec.clone();
        let x = match &cfg.io.data {
            Some(path) => {
                let table = usage_phase(parse_data(Path::new(path)))?;
                usage_phase(x_matrix(&cfg, &table))?
            }
            None => None,
        };
        if spec.m.is_none() {
            if let Some(xm) = &x {
                spec = spec.regressors(xm.ncols());
            }
        }
        let model =
            usage_phase(Model::from_spec(&spec, crate::distribution::registry()))?;
        let xs: Vec<Mat> = match x {
            Some(xm) => (0..model.param_count())
                .map(|i| if model.m[i] > 0 { xm.clone() } else { Mat::zeros(xm.nrows(), 0) })
                .collect(),
            None => Vec::new(),
        };
        (model, xs)
    };
    let coef = usage_phase(CoefSet::new(&model, coef_values))?;

    let sim = compute_phase(simulate_series(
        &model,
        &coef,
        cfg.task.t_sim,
        &x_sim,
        cfg.task.seed,
        cfg.task.burn_in,
    ))?;
    println!(
        "Simulated {} observations from {} / {}",
        sim.y_sim.len(),
        model.dist.descriptor().label,
        model.dist.descriptor().parametrization
    );
    let doc = output::simulation_doc(&model, &sim, Some(cfg.task.seed));
    compute_phase(write_doc(&cfg, &doc))?;
    Ok(())
}

fn cmd_bootstrap(flags: &Flags) -> std::result::Result<(), Failure> {
    let cfg = usage_phase(load_config(flags))?;
    let table = usage_phase(load_table(&cfg))?;
    let (model, series) = usage_phase(build_inputs(&cfg, &table))?;
    let method: BootstrapMethod = usage_phase(
        cfg.task.method.as_deref().unwrap_or("parametric").parse(),
    )?;

    let est = compute_phase(estimate_for_task(&cfg, &model, &series))?;
    let boot = compute_phase(bootstrap(
        &est,
        method,
        cfg.task.rep_boot,
        cfg.task.block_length,
        &cfg.task.quant,
        cfg.task.seed,
        cfg.task.jobs,
    ))?;

    println!(
        "Bootstrap ({}), {} replicates, {} failures",
        method.as_str(),
        boot.coef_samples.nrows(),
        boot.failures
    );
    println!("{:<24} {:>12} {:>12}", "", "Mean", "Std. Dev.");
    for (i, label) in est.coef_labels().iter().enumerate() {
        println!("{label:<24} {:>12.7} {:>12.7}", boot.coef_mean[i], boot.coef_sd[i]);
    }
    let doc = output::bootstrap_doc(&est, &boot, cfg.task.emit_samples, Some(cfg.task.seed));
    compute_phase(write_doc(&cfg, &doc))?;
    Ok(())
}

fn cmd_filter(flags: &Flags) -> std::result::Result<(), Failure> {
    let cfg = usage_phase(load_config(flags))?;
    let table = usage_phase(load_table(&cfg))?;
    let (model, series) = usage_phase(build_inputs(&cfg, &table))?;
    let method = match cfg.task.method.as_deref().unwrap_or("simulated_coefs") {
        "given_coefs" => FilterUncertaintyMethod::GivenCoefs,
        "simulated_coefs" => FilterUncertaintyMethod::SimulatedCoefs,
        other => {
            return Err(Failure {
                code: 1,
                message: format!("unknown filter method `{other}`"),
            })
        }
    };
    let t_ahead = cfg.task.t_ahead;
    let x_ahead = usage_phase(load_x_ahead(&cfg, &model, t_ahead))?;

    let coef_set = cfg.task.coef_set.as_ref().map(|rows| {
        let width = rows.first().map_or(0, Vec::len);
        Mat::from_rows(rows.clone(), width)
    });

    let est = compute_phase(estimate_for_task(&cfg, &model, &series))?;
    let unc = compute_phase(filter_uncertainty(
        &est,
        method,
        coef_set.as_ref(),
        cfg.task.rep_gen,
        t_ahead,
        &x_ahead,
        cfg.task.rep_ahead,
        &cfg.task.quant,
        cfg.task.seed,
    ))?;

    // Mean width of the outer quantile band of the first TV parameter.
    if let (Some(&first_tv), (probs, surfaces)) =
        (est.model.tv_params().first(), &unc.par_tv_quant)
    {
        if probs.len() >= 2 {
            let lo = &surfaces[0];
            let hi = &surfaces[probs.len() - 1];
            let t_len = lo.nrows();
            let width = (0..t_len)
                .map(|t| hi[(t, first_tv)] - lo[(t, first_tv)])
                .sum::<f64>()
                / t_len as f64;
            println!(
                "Mean {}-{} band width of {}: {:.7}",
                probs[0],
                probs[probs.len() - 1],
                est.model.wrapped_name(first_tv),
                width
            );
        }
    }
    let doc = output::filter_uncertainty_doc(&est, &unc, Some(cfg.task.seed));
    compute_phase(write_doc(&cfg, &doc))?;
    Ok(())
}

fn cmd_distr(flags: &Flags) -> std::result::Result<(), Failure> {
    let filter_type: Option<DataType> = match &flags.filter_type {
        Some(t) => Some(usage_phase(t.parse())?),
        None => None,
    };
    let filter_default = flags.default_only.then_some(true);
    let descriptors = list_distributions(filter_type, filter_default);
    let mut stdout = std::io::stdout();
    output::print_distr_table(&descriptors, &mut stdout).ok();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_names_itself() {
        let err = parse_flags(&["--bogus".to_string()]).unwrap_err().to_string();
        assert!(err.contains("--bogus"), "{err}");
    }

    #[test]
    fn missing_value_reported() {
        let err = parse_flags(&["--seed".to_string()]).unwrap_err().to_string();
        assert!(err.contains("--seed"), "{err}");
    }

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(run(vec!["frobnicate".to_string()]), 1);
    }

    #[test]
    fn distr_runs_clean() {
        assert_eq!(run(vec!["distr".to_string(), "--type".to_string(), "count".to_string()]), 0);
    }

    #[test]
    fn bad_type_exits_one() {
        assert_eq!(run(vec!["distr".to_string(), "--type".to_string(), "hexagonal".to_string()]), 1);
    }
}
