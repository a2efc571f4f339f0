//! Distribution registry: densities, moments, scores, Fisher information,
//! samplers, starting values, and the link machinery that transports
//! scores into unconstrained coefficient space.
//!
//! Every distribution/parametrization pair implements [`ScoreDistribution`].
//! Adding a family means registering one descriptor plus the eight
//! functions of the trait; see the crate-level docs for the contract.

mod bernoulli;
mod exponential;
mod gamma;
mod geometric;
mod laplace;
mod link;
mod negbin;
mod normal;
mod poisson;
mod skellam;
mod student_t;
mod vonmises;
mod weibull;

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use link::{link_apply, link_inverse};

/// Jacobian d(natural)/d(linked) of the inverse link at a natural value.
pub(crate) fn link_jacobian(support: Support, natural: f64) -> f64 {
    link::jacobian(support, natural)
}

/// Componentwise link application (log for positive supports, logit for
/// unit-interval supports, identity otherwise).
pub fn link_apply_component(support: Support, natural: f64) -> f64 {
    link::apply_component(support, natural)
}

/// Componentwise inverse link over a slice, mask pre-validated.
pub(crate) fn link_inverse_slice(
    desc: &DistributionDescriptor,
    linked: &[f64],
    mask: &[bool],
) -> Vec<f64> {
    linked
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if mask[i] {
                link::inverse_component(desc.param_supports[i], v)
            } else {
                v
            }
        })
        .collect()
}

/// Support plus joint-constraint check used by the filter hot path.
pub(crate) fn check_params_with_supports(d: &dyn ScoreDistribution, f: &[f64]) -> Result<()> {
    check_common(d, f)
}

/// Shared handle to a registered distribution.
pub type Dist = Arc<dyn ScoreDistribution>;

/// Dimension of the observation space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimKind {
    Univariate,
}

/// Kind of data the distribution models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Binary,
    Count,
    Integer,
    Real,
    Duration,
    Circular,
}

impl DataType {
    pub fn is_discrete(self) -> bool {
        matches!(self, DataType::Binary | DataType::Count | DataType::Integer)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DataType::Binary => "binary",
            DataType::Count => "count",
            DataType::Integer => "integer",
            DataType::Real => "real",
            DataType::Duration => "duration",
            DataType::Circular => "circular",
        }
    }
}

impl std::str::FromStr for DataType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(DataType::Binary),
            "count" => Ok(DataType::Count),
            "integer" => Ok(DataType::Integer),
            "real" => Ok(DataType::Real),
            "duration" => Ok(DataType::Duration),
            "circular" => Ok(DataType::Circular),
            other => Err(Error::Usage(format!("unknown data type `{other}`"))),
        }
    }
}

/// Support of a single distribution parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Real,
    Positive,
    UnitInterval,
    Circular,
}

impl Support {
    /// Whether the default log/logistic link applies to this support.
    pub fn has_default_link(self) -> bool {
        matches!(self, Support::Positive | Support::UnitInterval)
    }
}

/// Metadata for one distribution/parametrization pair.
#[derive(Debug, Clone)]
pub struct DistributionDescriptor {
    pub label: String,
    pub name: String,
    pub parametrization: String,
    pub parametrization_name: String,
    pub dim_kind: DimKind,
    pub data_type: DataType,
    pub param_count: usize,
    pub param_names: Vec<String>,
    pub param_supports: Vec<Support>,
    /// Fisher information diagonal in this parametrization.
    pub orthogonal: bool,
    /// True exactly where the support has a default log/logistic link.
    pub default_links: Vec<bool>,
}

impl DistributionDescriptor {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: &str,
        name: &str,
        parametrization: &str,
        parametrization_name: &str,
        data_type: DataType,
        param_names: &[&str],
        param_supports: &[Support],
        orthogonal: bool,
    ) -> Self {
        assert_eq!(param_names.len(), param_supports.len());
        let default_links = param_supports.iter().map(|s| s.has_default_link()).collect();
        DistributionDescriptor {
            label: label.to_string(),
            name: name.to_string(),
            parametrization: parametrization.to_string(),
            parametrization_name: parametrization_name.to_string(),
            dim_kind: DimKind::Univariate,
            data_type,
            param_count: param_names.len(),
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
            param_supports: param_supports.to_vec(),
            orthogonal,
            default_links,
        }
    }
}

/// A parameter vector on the natural (constrained) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalParams(pub Vec<f64>);

/// A parameter vector with links applied (unconstrained components).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkedParams(pub Vec<f64>);

/// One distribution/parametrization pair: density, moments, score, Fisher
/// information, sampler, and starting-value heuristic, all on the natural
/// parameter scale.
pub trait ScoreDistribution: Send + Sync {
    fn descriptor(&self) -> &DistributionDescriptor;

    /// Validate a natural parameter vector (componentwise supports plus
    /// any joint constraints).
    fn check_params(&self, f: &[f64]) -> Result<()>;

    fn in_sample_space(&self, y: f64) -> bool;

    /// Log density/mass at `y`; inputs assumed valid.
    fn loglik(&self, y: f64, f: &[f64]) -> f64;

    fn mean(&self, f: &[f64]) -> f64;

    fn variance(&self, f: &[f64]) -> f64;

    /// Gradient of the log density with respect to the natural parameters.
    fn score(&self, y: f64, f: &[f64], out: &mut [f64]);

    /// Expected outer product of the natural-scale score.
    fn fisher(&self, f: &[f64]) -> DMatrix<f64>;

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64;

    /// Method-of-moments style in-support estimate from the (non-missing)
    /// observations, clamped into the open support.
    fn start(&self, y: &[f64]) -> Vec<f64>;

    /// Parameters that may never be time-varying (e.g. degrees of freedom
    /// in the variance parametrization of the t distribution).
    fn static_only(&self) -> &'static [usize] {
        &[]
    }
}

fn check_common(d: &dyn ScoreDistribution, f: &[f64]) -> Result<()> {
    let desc = d.descriptor();
    if f.len() != desc.param_count {
        return Err(Error::Dimension(format!(
            "{} expects {} parameters, got {}",
            desc.label,
            desc.param_count,
            f.len()
        )));
    }
    for (i, (&v, support)) in f.iter().zip(&desc.param_supports).enumerate() {
        let ok = match support {
            Support::Real | Support::Circular => v.is_finite(),
            Support::Positive => v.is_finite() && v > 0.0,
            Support::UnitInterval => v.is_finite() && v > 0.0 && v < 1.0,
        };
        if !ok {
            return Err(Error::domain(format!(
                "parameter `{}` = {v} outside its support",
                desc.param_names[i]
            )));
        }
    }
    d.check_params(f)
}

fn check_observation(d: &dyn ScoreDistribution, y: f64) -> Result<()> {
    if d.in_sample_space(y) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "observation {y} outside the sample space of {}",
            d.descriptor().label
        )))
    }
}

/// Probability density (or mass) at `y`.
pub fn density(d: &Dist, y: f64, f: &NaturalParams) -> Result<f64> {
    check_common(d.as_ref(), &f.0)?;
    if !d.in_sample_space(y) {
        if d.descriptor().data_type.is_discrete() {
            return Ok(0.0);
        }
        return check_observation(d.as_ref(), y).map(|_| unreachable!());
    }
    Ok(d.loglik(y, &f.0).exp())
}

/// Log density; `-inf` where the mass is zero.
pub fn loglik(d: &Dist, y: f64, f: &NaturalParams) -> Result<f64> {
    check_common(d.as_ref(), &f.0)?;
    if !d.in_sample_space(y) {
        if d.descriptor().data_type.is_discrete() {
            return Ok(f64::NEG_INFINITY);
        }
        return check_observation(d.as_ref(), y).map(|_| unreachable!());
    }
    Ok(d.loglik(y, &f.0))
}

/// First moment.
pub fn dist_mean(d: &Dist, f: &NaturalParams) -> Result<f64> {
    check_common(d.as_ref(), &f.0)?;
    Ok(d.mean(&f.0))
}

/// Second central moment (circular variance for circular families).
pub fn dist_variance(d: &Dist, f: &NaturalParams) -> Result<f64> {
    check_common(d.as_ref(), &f.0)?;
    Ok(d.variance(&f.0))
}

/// Score vector; components flagged in `linked` are reported in link
/// space through the inverse-link Jacobian.
pub fn score(d: &Dist, y: f64, f: &NaturalParams, linked: &[bool]) -> Result<Vec<f64>> {
    check_common(d.as_ref(), &f.0)?;
    check_observation(d.as_ref(), y)?;
    link::validate_mask(d.descriptor(), linked)?;
    let mut out = vec![0.0; f.0.len()];
    d.score(y, &f.0, &mut out);
    for (i, s) in out.iter_mut().enumerate() {
        if linked[i] {
            *s *= link::jacobian(d.descriptor().param_supports[i], f.0[i]);
        }
    }
    Ok(out)
}

/// Fisher information; linked components are transported as J' I J with
/// J the diagonal inverse-link Jacobian.
pub fn fisher(d: &Dist, f: &NaturalParams, linked: &[bool]) -> Result<DMatrix<f64>> {
    check_common(d.as_ref(), &f.0)?;
    link::validate_mask(d.descriptor(), linked)?;
    let mut info = d.fisher(&f.0);
    let k = f.0.len();
    let jac: Vec<f64> = (0..k)
        .map(|i| {
            if linked[i] {
                link::jacobian(d.descriptor().param_supports[i], f.0[i])
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..k {
        for j in 0..k {
            info[(i, j)] *= jac[i] * jac[j];
        }
    }
    Ok(info)
}

/// `n` i.i.d. draws, deterministic given `seed`.
pub fn random(d: &Dist, f: &NaturalParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_common(d.as_ref(), &f.0)?;
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| d.sample(&f.0, &mut rng)).collect())
}

/// Starting values from an observation sequence with missing entries.
pub fn start_values(d: &Dist, y: &[Option<f64>]) -> Result<NaturalParams> {
    let clean: Vec<f64> = y.iter().filter_map(|v| *v).collect();
    if clean.is_empty() {
        return Err(Error::Data("all observations are missing".into()));
    }
    Ok(NaturalParams(d.start(&clean)))
}

/// The distribution registry. Immutable once shared; register custom
/// families before handing it out.
pub struct Registry {
    entries: Vec<Dist>,
}

impl Registry {
    /// Registry with the built-in families.
    pub fn builtin() -> Self {
        let mut r = Registry { entries: Vec::new() };
        let builtins: Vec<Dist> = vec![
            Arc::new(bernoulli::Bernoulli::new()),
            Arc::new(exponential::Exponential::new()),
            Arc::new(gamma::Gamma::new()),
            Arc::new(geometric::Geometric::new()),
            Arc::new(laplace::Laplace::new()),
            Arc::new(negbin::NegBin::new()),
            Arc::new(normal::Normal::new()),
            Arc::new(poisson::Poisson::new()),
            Arc::new(skellam::Skellam::new()),
            Arc::new(student_t::StudentT::new()),
            Arc::new(vonmises::VonMises::new()),
            Arc::new(weibull::Weibull::new()),
        ];
        for d in builtins {
            r.register(d).expect("builtin registration");
        }
        r
    }

    /// Register a distribution; the first parametrization registered for a
    /// label becomes its default.
    pub fn register(&mut self, d: Dist) -> Result<()> {
        let desc = d.descriptor();
        if self.find(&desc.label, Some(&desc.parametrization)).is_some() {
            return Err(Error::spec(format!(
                "distribution {}/{} already registered",
                desc.label, desc.parametrization
            )));
        }
        self.entries.push(d);
        Ok(())
    }

    fn find(&self, label: &str, param: Option<&str>) -> Option<&Dist> {
        self.entries.iter().find(|d| {
            let desc = d.descriptor();
            desc.label == label && param.map_or(true, |p| desc.parametrization == p)
        })
    }

    /// Resolve a label and optional parametrization (default: the first
    /// registered parametrization of the label).
    pub fn resolve(&self, label: &str, param: Option<&str>) -> Result<Dist> {
        self.find(label, param).cloned().ok_or_else(|| {
            Error::spec(match param {
                Some(p) => format!("unknown distribution `{label}` / parametrization `{p}`"),
                None => format!("unknown distribution `{label}`"),
            })
        })
    }

    fn is_default(&self, d: &Dist) -> bool {
        let label = &d.descriptor().label;
        self.entries
            .iter()
            .find(|e| &e.descriptor().label == label)
            .map(|first| first.descriptor().parametrization == d.descriptor().parametrization)
            .unwrap_or(false)
    }

    /// Descriptors matching the filters, ordered by label then
    /// parametrization.
    pub fn list(
        &self,
        filter_type: Option<DataType>,
        filter_default: Option<bool>,
    ) -> Vec<DistributionDescriptor> {
        let mut out: Vec<DistributionDescriptor> = self
            .entries
            .iter()
            .filter(|d| filter_type.map_or(true, |t| d.descriptor().data_type == t))
            .filter(|d| filter_default.map_or(true, |want| self.is_default(d) == want))
            .map(|d| d.descriptor().clone())
            .collect();
        out.sort_by(|a, b| (a.label.clone(), a.parametrization.clone()).cmp(&(b.label.clone(), b.parametrization.clone())));
        out
    }
}

/// Global registry of built-in distributions.
pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::builtin)
}

/// Descriptors from the global registry matching the filters.
pub fn list_distributions(
    filter_type: Option<DataType>,
    filter_default: Option<bool>,
) -> Vec<DistributionDescriptor> {
    registry().list(filter_type, filter_default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_twelve() {
        assert_eq!(list_distributions(None, None).len(), 12);
    }

    #[test]
    fn count_filter_matches_case_study() {
        let labels: Vec<String> = list_distributions(Some(DataType::Count), Some(true))
            .into_iter()
            .map(|d| d.label)
            .collect();
        assert_eq!(labels, vec!["geom", "negbin", "pois"]);
    }

    #[test]
    fn circular_filter_is_vonmises() {
        let ds = list_distributions(Some(DataType::Circular), None);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].label, "vonmises");
    }

    #[test]
    fn default_links_follow_supports() {
        for d in list_distributions(None, None) {
            for (s, &l) in d.param_supports.iter().zip(&d.default_links) {
                assert_eq!(l, s.has_default_link());
            }
            assert_eq!(d.param_names.len(), d.param_count);
            assert_eq!(d.param_supports.len(), d.param_count);
        }
    }

    #[test]
    fn out_of_support_params_error() {
        let d = registry().resolve("pois", None).unwrap();
        assert!(density(&d, 1.0, &NaturalParams(vec![-1.0])).is_err());
        assert!(density(&d, 1.0, &NaturalParams(vec![f64::NAN])).is_err());
    }

    #[test]
    fn discrete_out_of_space_mass_zero() {
        let d = registry().resolve("pois", None).unwrap();
        let f = NaturalParams(vec![2.0]);
        assert_eq!(density(&d, -3.0, &f).unwrap(), 0.0);
        assert_eq!(density(&d, 1.5, &f).unwrap(), 0.0);
        assert_eq!(loglik(&d, -3.0, &f).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn continuous_out_of_space_errors() {
        let d = registry().resolve("exp", None).unwrap();
        assert!(density(&d, -0.5, &NaturalParams(vec![1.0])).is_err());
    }

    #[test]
    fn random_empty_and_degenerate() {
        let d = registry().resolve("bernoulli", None).unwrap();
        let f = NaturalParams(vec![1.0 - 1e-12]);
        assert!(random(&d, &f, 0, 1).unwrap().is_empty());
        assert_eq!(random(&d, &f, 5, 1).unwrap(), vec![1.0; 5]);
    }
}
