//! Run configuration: one TOML file per run, flags override config keys.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelSpec;
use crate::error::{Error, Result};

fn default_quant() -> Vec<f64> {
    vec![0.025, 0.975]
}

fn default_rep() -> usize {
    1000
}

fn default_max_evals() -> usize {
    1_000_000
}

fn default_diameter_tol() -> f64 {
    1e-10
}

/// Constraint block keyed by coefficient names; lowered onto the dense
/// representation once the model (and its labels) exists.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    /// Coefficient name -> fixed value.
    #[serde(default)]
    pub fix: BTreeMap<String, f64>,
    /// Sparse linear ties: fixed coefficient = fix value + mult * estimated.
    #[serde(default)]
    pub ties: Vec<TieConfig>,
    #[serde(default)]
    pub special: Vec<crate::estimation::SpecialConstraint>,
    #[serde(default)]
    pub lower: BTreeMap<String, f64>,
    #[serde(default)]
    pub upper: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TieConfig {
    /// Name of the fixed coefficient (the row).
    pub fixed: String,
    /// Name of the estimated coefficient it is tied to (the column).
    pub on: String,
    pub mult: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    #[serde(default)]
    pub lik_skip: usize,
    #[serde(default)]
    pub coef_start: Option<Vec<f64>>,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default = "default_diameter_tol")]
    pub diameter_tol: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            lik_skip: 0,
            coef_start: None,
            max_evals: default_max_evals(),
            diameter_tol: default_diameter_tol(),
        }
    }
}

/// Task-specific knobs; which ones apply depends on the subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub t_ahead: usize,
    #[serde(default)]
    pub t_sim: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Forecast: mean_path | simulated_paths; bootstrap: parametric |
    /// simple_block | moving_block | stationary_block; filter:
    /// given_coefs | simulated_coefs.
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default = "default_rep")]
    pub rep_boot: usize,
    #[serde(default = "default_rep")]
    pub rep_ahead: usize,
    #[serde(default = "default_rep")]
    pub rep_gen: usize,
    #[serde(default = "default_quant")]
    pub quant: Vec<f64>,
    #[serde(default)]
    pub block_length: Option<usize>,
    /// Coefficient values: skips estimation for forecast/simulate, and
    /// pins a fully fixed model elsewhere.
    #[serde(default)]
    pub coef_est: Option<Vec<f64>>,
    /// Coefficient sets for the given_coefs filter method.
    #[serde(default)]
    pub coef_set: Option<Vec<Vec<f64>>>,
    /// CSV with regressor values for the forecast period.
    #[serde(default)]
    pub x_ahead_data: Option<String>,
    #[serde(default)]
    pub emit_samples: bool,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub progress: bool,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            seed: 0,
            t_ahead: 0,
            t_sim: 0,
            burn_in: 0,
            method: None,
            rep_boot: default_rep(),
            rep_ahead: default_rep(),
            rep_gen: default_rep(),
            quant: default_quant(),
            block_length: None,
            coef_est: None,
            coef_set: None,
            x_ahead_data: None,
            emit_samples: false,
            jobs: None,
            progress: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default)]
    pub out: Option<String>,
    /// Observation column; defaults to `y`, else the only column.
    #[serde(default)]
    pub y: Option<String>,
    /// Regressor columns, common to all time-varying parameters.
    #[serde(default)]
    pub x: Vec<String>,
    /// Opaque label column carried through to outputs.
    #[serde(default)]
    pub time: Option<String>,
}

/// A full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub constraints: ConstraintConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub io: IoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            constraints: ConstraintConfig::default(),
            estimation: EstimationConfig::default(),
            task: TaskConfig::default(),
            io: IoConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn model_spec(&self) -> Result<&ModelSpec> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Usage("config is missing the [model] block".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_match_the_argument_surface() {
        let cfg: RunConfig = toml::from_str("[model]\ndistr = \"pois\"\n").unwrap();
        let spec = cfg.model_spec().unwrap();
        assert!(matches!(spec.scaling, crate::dynamics::Scaling::Unit));
        assert!(matches!(spec.regress, crate::dynamics::RegressMode::Joint));
        assert!(spec.p.is_none() && spec.q.is_none()); // normalized to 1 at build
        assert_eq!(cfg.task.quant, vec![0.025, 0.975]);
        assert_eq!(cfg.task.rep_boot, 1000);
        assert_eq!(cfg.task.rep_ahead, 1000);
        assert_eq!(cfg.task.rep_gen, 1000);
        assert_eq!(cfg.estimation.max_evals, 1_000_000);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = toml::from_str::<RunConfig>("[model]\ndistr = \"pois\"\nbanana = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("banana"), "{err}");
    }

    #[test]
    fn load_reports_file_context() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"[model]\n= broken\n").unwrap();
        let err = RunConfig::load(f.path()).unwrap_err().to_string();
        assert!(err.contains("usage error"), "{err}");
    }

    #[test]
    fn constraint_block_round_trip() {
        let text = r#"
[model]
distr = "pois"

[constraints]
fix = { "log(mean)_alpha1" = 0.05 }
special = ["random_walk"]
lower = { "log(mean)_phi1" = 0.0 }

[task]
seed = 42
quant = [0.1, 0.5, 0.9]
"#;
        let cfg: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.constraints.fix["log(mean)_alpha1"], 0.05);
        assert_eq!(cfg.constraints.special.len(), 1);
        assert_eq!(cfg.task.seed, 42);
        assert_eq!(cfg.task.quant.len(), 3);
    }
}
