//! The score-driven recursion: model specification, coefficient layout,
//! score scaling, long-term initialization, and the filter itself.
//!
//! Time-varying parameters live in link space throughout. At each step
//! the linked parameter vector is mapped back to the natural scale, the
//! observation's score is computed, transported into link space through
//! the inverse-link Jacobian, scaled, and fed into the recursion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distribution::{link_inverse_slice, Dist, Registry, Support};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::Mat;

/// Scaling function applied to the score before it enters the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    #[default]
    Unit,
    FisherInv,
    FisherInvSqrt,
    FullFisherInv,
    FullFisherInvSqrt,
    DiagFisherInv,
    DiagFisherInvSqrt,
}

impl Scaling {
    pub fn as_str(self) -> &'static str {
        match self {
            Scaling::Unit => "unit",
            Scaling::FisherInv => "fisher_inv",
            Scaling::FisherInvSqrt => "fisher_inv_sqrt",
            Scaling::FullFisherInv => "full_fisher_inv",
            Scaling::FullFisherInvSqrt => "full_fisher_inv_sqrt",
            Scaling::DiagFisherInv => "diag_fisher_inv",
            Scaling::DiagFisherInvSqrt => "diag_fisher_inv_sqrt",
        }
    }

    pub fn needs_fisher(self) -> bool {
        !matches!(self, Scaling::Unit)
    }
}

/// How exogenous variables enter the dynamics: inside the autoregressive
/// recursion (joint) or as a regression level with a score-driven error
/// process (sep).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressMode {
    #[default]
    Joint,
    Sep,
}

impl RegressMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RegressMode::Joint => "joint",
            RegressMode::Sep => "sep",
        }
    }
}

/// Scalar-or-vector order specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Orders {
    Scalar(usize),
    PerParam(Vec<usize>),
}

/// Everything defining a GAS model short of coefficient values.
///
/// Unset fields take the conventional defaults: the first distribution
/// parameter is time-varying and the rest static, time-varying orders
/// p = q = 1, log/logistic links on constrained time-varying parameters,
/// unit scaling, joint regression, no regressors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub distr: String,
    #[serde(default)]
    pub param: Option<String>,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub regress: RegressMode,
    #[serde(default)]
    pub p: Option<Orders>,
    #[serde(default)]
    pub q: Option<Orders>,
    #[serde(default)]
    pub par_static: Option<Vec<bool>>,
    #[serde(default)]
    pub par_link: Option<Vec<bool>>,
    /// Initial values of the time-varying parameters, in link space.
    #[serde(default)]
    pub par_init: Option<Vec<f64>>,
    /// Regressor counts per parameter.
    #[serde(default)]
    pub m: Option<Orders>,
}

impl ModelSpec {
    pub fn new(distr: &str) -> Self {
        ModelSpec {
            distr: distr.to_string(),
            param: None,
            scaling: Scaling::default(),
            regress: RegressMode::default(),
            p: None,
            q: None,
            par_static: None,
            par_link: None,
            par_init: None,
            m: None,
        }
    }

    pub fn param(mut self, p: &str) -> Self {
        self.param = Some(p.to_string());
        self
    }

    pub fn scaling(mut self, s: Scaling) -> Self {
        self.scaling = s;
        self
    }

    pub fn regress(mut self, r: RegressMode) -> Self {
        self.regress = r;
        self
    }

    pub fn orders(mut self, p: usize, q: usize) -> Self {
        self.p = Some(Orders::Scalar(p));
        self.q = Some(Orders::Scalar(q));
        self
    }

    pub fn orders_per_param(mut self, p: Vec<usize>, q: Vec<usize>) -> Self {
        self.p = Some(Orders::PerParam(p));
        self.q = Some(Orders::PerParam(q));
        self
    }

    pub fn par_static(mut self, v: Vec<bool>) -> Self {
        self.par_static = Some(v);
        self
    }

    pub fn par_link(mut self, v: Vec<bool>) -> Self {
        self.par_link = Some(v);
        self
    }

    pub fn par_init(mut self, v: Vec<f64>) -> Self {
        self.par_init = Some(v);
        self
    }

    pub fn regressors(mut self, m: usize) -> Self {
        self.m = Some(Orders::Scalar(m));
        self
    }

    pub fn regressors_per_param(mut self, m: Vec<usize>) -> Self {
        self.m = Some(Orders::PerParam(m));
        self
    }
}

/// A validated model: resolved distribution, normalized per-parameter
/// orders and masks, and the coefficient layout.
#[derive(Clone)]
pub struct Model {
    pub dist: Dist,
    pub scaling: Scaling,
    pub regress: RegressMode,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub par_static: Vec<bool>,
    pub par_link: Vec<bool>,
    pub par_init: Option<Vec<f64>>,
    pub m: Vec<usize>,
    offsets: Vec<usize>,
    n_coef: usize,
    labels: Vec<String>,
    warm: usize,
    tv: Vec<usize>,
}

fn expand_orders(
    orders: &Option<Orders>,
    par_static: &[bool],
    default_tv: usize,
    what: &str,
) -> Result<Vec<usize>> {
    let k = par_static.len();
    let out: Vec<usize> = match orders {
        None => par_static.iter().map(|&s| if s { 0 } else { default_tv }).collect(),
        Some(Orders::Scalar(v)) => {
            par_static.iter().map(|&s| if s { 0 } else { *v }).collect()
        }
        Some(Orders::PerParam(v)) => {
            if v.len() != k {
                return Err(Error::Dimension(format!(
                    "{what} has length {}, expected {k}",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    for (i, (&val, &is_static)) in out.iter().zip(par_static).enumerate() {
        if is_static && val != 0 {
            return Err(Error::spec(format!(
                "{what}[{i}] = {val} but parameter {i} is static"
            )));
        }
    }
    Ok(out)
}

impl Model {
    pub fn from_spec(spec: &ModelSpec, registry: &Registry) -> Result<Model> {
        let dist = registry.resolve(&spec.distr, spec.param.as_deref())?;
        let desc = dist.descriptor().clone();
        let k = desc.param_count;

        let par_static = match &spec.par_static {
            None => (0..k).map(|i| i != 0).collect::<Vec<bool>>(),
            Some(v) => {
                if v.len() != k {
                    return Err(Error::Dimension(format!(
                        "par_static has length {}, expected {k}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        for &i in dist.static_only() {
            if !par_static[i] {
                return Err(Error::spec(format!(
                    "parameter `{}` of {} must be static",
                    desc.param_names[i], desc.label
                )));
            }
        }

        let par_link = match &spec.par_link {
            None => (0..k)
                .map(|i| !par_static[i] && desc.default_links[i])
                .collect::<Vec<bool>>(),
            Some(v) => {
                if v.len() != k {
                    return Err(Error::Dimension(format!(
                        "par_link has length {}, expected {k}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        for (i, &linked) in par_link.iter().enumerate() {
            if linked && !desc.param_supports[i].has_default_link() {
                return Err(Error::spec(format!(
                    "parameter `{}` has no link function for its support",
                    desc.param_names[i]
                )));
            }
            if !par_static[i]
                && !linked
                && matches!(desc.param_supports[i], Support::Positive | Support::UnitInterval)
            {
                // Allowed, but the recursion can then leave the support;
                // the filter signals a non-finite likelihood when it does.
            }
        }

        let p = expand_orders(&spec.p, &par_static, 1, "p")?;
        let q = expand_orders(&spec.q, &par_static, 1, "q")?;
        let m = expand_orders(&spec.m, &par_static, 0, "m")?;

        if let Some(pi) = &spec.par_init {
            if pi.len() != k {
                return Err(Error::Dimension(format!(
                    "par_init has length {}, expected {k}",
                    pi.len()
                )));
            }
        }

        let mut offsets = Vec::with_capacity(k);
        let mut n_coef = 0;
        for i in 0..k {
            offsets.push(n_coef);
            n_coef += if par_static[i] { 1 } else { 1 + m[i] + p[i] + q[i] };
        }

        let tv: Vec<usize> = (0..k).filter(|&i| !par_static[i]).collect();
        let warm = tv.iter().map(|&i| p[i].max(q[i])).max().unwrap_or(0);

        let mut model = Model {
            dist,
            scaling: spec.scaling,
            regress: spec.regress,
            p,
            q,
            par_static,
            par_link,
            par_init: spec.par_init.clone(),
            m,
            offsets,
            n_coef,
            labels: Vec::new(),
            warm,
            tv,
        };
        model.labels = model.build_labels();
        Ok(model)
    }

    pub fn param_count(&self) -> usize {
        self.par_static.len()
    }

    pub fn coef_count(&self) -> usize {
        self.n_coef
    }

    pub fn coef_labels(&self) -> &[String] {
        &self.labels
    }

    /// Indices of the time-varying parameters.
    pub fn tv_params(&self) -> &[usize] {
        &self.tv
    }

    /// Number of initialization rows, max over parameters of max(P, Q).
    pub fn warm(&self) -> usize {
        self.warm
    }

    /// Parameter name wrapped in its link function where linked,
    /// e.g. `log(mean)` or `logit(prob)`.
    pub fn wrapped_name(&self, i: usize) -> String {
        let desc = self.dist.descriptor();
        let name = &desc.param_names[i];
        if self.par_link[i] {
            match desc.param_supports[i] {
                Support::Positive => format!("log({name})"),
                Support::UnitInterval => format!("logit({name})"),
                _ => name.clone(),
            }
        } else {
            name.clone()
        }
    }

    fn build_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.n_coef);
        for i in 0..self.param_count() {
            let w = self.wrapped_name(i);
            if self.par_static[i] {
                labels.push(w);
            } else {
                labels.push(format!("{w}_omega"));
                for j in 1..=self.m[i] {
                    labels.push(format!("{w}_beta{j}"));
                }
                for j in 1..=self.p[i] {
                    labels.push(format!("{w}_alpha{j}"));
                }
                for j in 1..=self.q[i] {
                    labels.push(format!("{w}_phi{j}"));
                }
            }
        }
        labels
    }

    pub fn coef_view<'a>(&'a self, values: &'a [f64]) -> CoefView<'a> {
        debug_assert_eq!(values.len(), self.n_coef);
        CoefView { model: self, v: values }
    }

    /// Map a link-space parameter row to the natural scale.
    pub fn natural_row(&self, f_linked: &[f64]) -> Vec<f64> {
        link_inverse_slice(self.dist.descriptor(), f_linked, &self.par_link)
    }
}

/// The full coefficient vector theta with the layout
/// `[omega_i, beta_i.., alpha_i.., phi_i..]` per time-varying parameter
/// and a single level per static parameter, in parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefSet {
    pub values: Vec<f64>,
}

impl CoefSet {
    pub fn new(model: &Model, values: Vec<f64>) -> Result<Self> {
        if values.len() != model.coef_count() {
            return Err(Error::Dimension(format!(
                "coefficient vector has length {}, expected {}",
                values.len(),
                model.coef_count()
            )));
        }
        Ok(CoefSet { values })
    }
}

/// Borrowed view of a coefficient vector with named block accessors.
#[derive(Clone, Copy)]
pub struct CoefView<'a> {
    model: &'a Model,
    v: &'a [f64],
}

impl<'a> CoefView<'a> {
    pub fn omega(&self, i: usize) -> f64 {
        debug_assert!(!self.model.par_static[i]);
        self.v[self.model.offsets[i]]
    }

    pub fn beta(&self, i: usize) -> &'a [f64] {
        let o = self.model.offsets[i] + 1;
        &self.v[o..o + self.model.m[i]]
    }

    pub fn alpha(&self, i: usize) -> &'a [f64] {
        let o = self.model.offsets[i] + 1 + self.model.m[i];
        &self.v[o..o + self.model.p[i]]
    }

    pub fn phi(&self, i: usize) -> &'a [f64] {
        let o = self.model.offsets[i] + 1 + self.model.m[i] + self.model.p[i];
        &self.v[o..o + self.model.q[i]]
    }

    pub fn level(&self, i: usize) -> f64 {
        debug_assert!(self.model.par_static[i]);
        self.v[self.model.offsets[i]]
    }

    /// omega + beta . x for time-varying parameters, the level otherwise.
    pub fn regression_term(&self, i: usize, x_row: &[f64]) -> f64 {
        if self.model.par_static[i] {
            self.level(i)
        } else {
            let mut r = self.omega(i);
            for (b, x) in self.beta(i).iter().zip(x_row) {
                r += b * x;
            }
            r
        }
    }
}

/// Observations (with missing flags) and per-parameter regressors.
#[derive(Debug, Clone)]
pub struct SeriesData {
    pub y: Vec<Option<f64>>,
    /// One T x m_i matrix per distribution parameter (0 columns where the
    /// parameter has no regressors).
    pub x: Vec<Mat>,
}

impl SeriesData {
    /// Series without regressors.
    pub fn univariate(y: Vec<Option<f64>>) -> Self {
        SeriesData { y, x: Vec::new() }
    }

    /// Series with the same regressor matrix for every time-varying
    /// parameter that declares regressors.
    pub fn with_common_x(y: Vec<Option<f64>>, x: Mat, model: &Model) -> Self {
        let xs = (0..model.param_count())
            .map(|i| {
                if model.m[i] > 0 {
                    x.clone()
                } else {
                    Mat::zeros(y.len(), 0)
                }
            })
            .collect();
        SeriesData { y, x: xs }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn x_row(&self, i: usize, t: usize) -> &[f64] {
        static EMPTY: [f64; 0] = [];
        match self.x.get(i) {
            Some(m) if m.ncols() > 0 => m.row(t),
            _ => &EMPTY,
        }
    }

    /// Column means of each parameter's regressors over all rows.
    pub fn x_means(&self, model: &Model) -> Vec<Vec<f64>> {
        let t = self.len().max(1) as f64;
        (0..model.param_count())
            .map(|i| match self.x.get(i) {
                Some(m) if m.ncols() > 0 => (0..m.ncols())
                    .map(|c| m.col(c).iter().sum::<f64>() / t)
                    .collect(),
                _ => Vec::new(),
            })
            .collect()
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.y.is_empty() {
            return Err(Error::Data("the series is empty".into()));
        }
        for i in 0..model.param_count() {
            let need = model.m[i];
            let got = self.x.get(i).map_or(0, Mat::ncols);
            if need != got {
                return Err(Error::Dimension(format!(
                    "parameter {i} declares {need} regressors but data supplies {got}"
                )));
            }
            if need > 0 {
                let rows = self.x[i].nrows();
                if rows != self.y.len() {
                    return Err(Error::Dimension(format!(
                        "regressors for parameter {i} have {rows} rows, series has {}",
                        self.y.len()
                    )));
                }
                if self.x[i].as_slice().iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data(format!(
                        "regressors for parameter {i} contain missing or non-finite values"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-step output of the filter.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// T x K link-space parameter paths (static columns constant).
    pub par_tv: Mat,
    /// T x K scaled scores (static columns zero).
    pub score_tv: Mat,
    /// T x K dynamic errors, sep mode only.
    pub err_tv: Option<Mat>,
    /// Per-step log-likelihood contributions; `None` marks a missing
    /// observation.
    pub loglik_t: Vec<Option<f64>>,
    /// Sum of the non-missing, non-skipped contributions; `-inf` when the
    /// recursion left the parameter support or the likelihood degenerated.
    pub loglik_sum: f64,
    /// Initialization vector: the long-term value of the recursion, or
    /// `par_init` where it overrides.
    pub f_bar: Vec<f64>,
    /// Number of likelihood terms included in `loglik_sum`.
    pub n_eff: usize,
    /// Index of the first step at which the recursion failed, if any.
    pub failed_at: Option<usize>,
}

impl FilterOutput {
    /// Last `warm` rows of the filter state, enough to continue the
    /// recursion past the sample.
    pub(crate) fn tail(&self, model: &Model) -> RecursionTail {
        let t = self.par_tv.nrows();
        let rows = model.warm().min(t);
        let k = self.par_tv.ncols();
        let mut f = Vec::with_capacity(rows * k);
        let mut u = Vec::with_capacity(rows * k);
        let mut e = Vec::new();
        for r in (t - rows)..t {
            f.extend_from_slice(self.par_tv.row(r));
            u.extend_from_slice(self.score_tv.row(r));
            if let Some(err) = &self.err_tv {
                e.extend_from_slice(err.row(r));
            }
        }
        RecursionTail { rows, f, u, e }
    }
}

/// Long-term initialization of the recursion (static parameters take
/// their level coefficient).
pub fn long_term_init(model: &Model, coef: &CoefSet, x_means: &[Vec<f64>]) -> Result<Vec<f64>> {
    let view = model.coef_view(&coef.values);
    let k = model.param_count();
    let mut out = vec![0.0; k];
    for i in 0..k {
        if model.par_static[i] {
            out[i] = view.level(i);
            continue;
        }
        let empty: &[f64] = &[];
        let xm: &[f64] = x_means.get(i).map_or(empty, Vec::as_slice);
        let base = view.regression_term(i, xm);
        out[i] = match model.regress {
            RegressMode::Sep => base,
            RegressMode::Joint => {
                let phi_sum: f64 = view.phi(i).iter().sum();
                let denom = 1.0 - phi_sum;
                if denom.abs() <= 1e-8 {
                    return Err(Error::UnitRootInit(
                        model.dist.descriptor().param_names[i].clone(),
                    ));
                }
                base / denom
            }
        };
    }
    Ok(out)
}

/// Apply the model's scaling function to a raw link-space score, given
/// the full link-space Fisher matrix (ignored for unit scaling). Static
/// components of the result are zero.
pub fn scale_score(model: &Model, raw_score: &[f64], fisher_full: &DMatrix<f64>) -> Vec<f64> {
    let k = model.param_count();
    let tv = &model.tv;
    let mut out = vec![0.0; k];
    match model.scaling {
        Scaling::Unit => {
            for &i in tv {
                out[i] = raw_score[i];
            }
        }
        Scaling::FisherInv | Scaling::FisherInvSqrt => {
            let nt = tv.len();
            let mut sub = DMatrix::zeros(nt, nt);
            for (a, &i) in tv.iter().enumerate() {
                for (b, &j) in tv.iter().enumerate() {
                    sub[(a, b)] = fisher_full[(i, j)];
                }
            }
            let mat = if model.scaling == Scaling::FisherInv {
                linalg::sym_pinv(&sub).0
            } else {
                linalg::sym_inv_sqrt(&sub)
            };
            let raw_tv = DVector::from_iterator(nt, tv.iter().map(|&i| raw_score[i]));
            let scaled = mat * raw_tv;
            for (a, &i) in tv.iter().enumerate() {
                out[i] = scaled[a];
            }
        }
        Scaling::FullFisherInv | Scaling::FullFisherInvSqrt => {
            let mat = if model.scaling == Scaling::FullFisherInv {
                linalg::sym_pinv(fisher_full).0
            } else {
                linalg::sym_inv_sqrt(fisher_full)
            };
            let raw_full = DVector::from_column_slice(raw_score);
            let scaled = mat * raw_full;
            for &i in tv {
                out[i] = scaled[i];
            }
        }
        Scaling::DiagFisherInv => {
            for &i in tv {
                let d = fisher_full[(i, i)];
                out[i] = if d != 0.0 { raw_score[i] / d } else { 0.0 };
            }
        }
        Scaling::DiagFisherInvSqrt => {
            for &i in tv {
                let d = fisher_full[(i, i)].max(0.0);
                out[i] = if d != 0.0 { raw_score[i] / d.sqrt() } else { 0.0 };
            }
        }
    }
    let _ = k;
    out
}

/// Rolling state of the recursion shared by the filter, the simulator,
/// and the forecasters. Histories are flat row-major T x K.
pub(crate) struct Recursion<'a> {
    model: &'a Model,
    coef: &'a [f64],
    k: usize,
    init: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
    len: usize,
    /// Rows below this index are pinned to `init`.
    pinned: usize,
}

impl<'a> Recursion<'a> {
    pub fn new(model: &'a Model, coef: &'a [f64], init: Vec<f64>, capacity: usize) -> Self {
        let k = model.param_count();
        Recursion {
            model,
            coef,
            k,
            init,
            f: Vec::with_capacity(capacity * k),
            u: Vec::with_capacity(capacity * k),
            e: Vec::with_capacity(if model.regress == RegressMode::Sep {
                capacity * k
            } else {
                0
            }),
            len: 0,
            pinned: model.warm(),
        }
    }

    /// Resume from the tail of a finished recursion: `rows` must hold the
    /// last `warm` rows of (f, u, e).
    pub fn from_tail(model: &'a Model, coef: &'a [f64], tail: &RecursionTail) -> Self {
        let mut r = Recursion::new(model, coef, Vec::new(), tail.rows + 16);
        r.f.extend_from_slice(&tail.f);
        r.u.extend_from_slice(&tail.u);
        r.e.extend_from_slice(&tail.e);
        r.len = tail.rows;
        r.pinned = 0;
        r
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn row_f(&self, t: usize) -> &[f64] {
        &self.f[t * self.k..(t + 1) * self.k]
    }

    /// Compute and append the parameter row at the next time index, given
    /// the regression terms (omega + beta.x per parameter, levels for
    /// static ones). Returns the new row.
    pub fn push_row(&mut self, reg: &[f64]) -> &[f64] {
        let t = self.len;
        let view = self.model.coef_view(self.coef);
        let sep = self.model.regress == RegressMode::Sep;
        let mut f_row = vec![0.0; self.k];
        let mut e_row = vec![0.0; self.k];
        for i in 0..self.k {
            if self.model.par_static[i] {
                f_row[i] = reg[i];
                continue;
            }
            if t < self.pinned {
                f_row[i] = self.init[i];
                if sep {
                    e_row[i] = f_row[i] - reg[i];
                }
                continue;
            }
            let alpha = view.alpha(i);
            let phi = view.phi(i);
            let mut drive = 0.0;
            for (lag, a) in alpha.iter().enumerate() {
                drive += a * self.u[(t - 1 - lag) * self.k + i];
            }
            if sep {
                let mut e = drive;
                for (lag, ph) in phi.iter().enumerate() {
                    e += ph * self.e[(t - 1 - lag) * self.k + i];
                }
                e_row[i] = e;
                f_row[i] = reg[i] + e;
            } else {
                let mut f = reg[i] + drive;
                for (lag, ph) in phi.iter().enumerate() {
                    f += ph * self.f[(t - 1 - lag) * self.k + i];
                }
                f_row[i] = f;
            }
        }
        self.f.extend_from_slice(&f_row);
        if sep {
            self.e.extend_from_slice(&e_row);
        }
        self.len += 1;
        self.row_f(t)
    }

    /// Record the scaled score for the most recent row.
    pub fn set_score(&mut self, u_row: &[f64]) {
        debug_assert_eq!(self.u.len() / self.k, self.len - 1);
        self.u.extend_from_slice(u_row);
    }
}

/// Snapshot of the last `warm` rows, sufficient to continue a recursion.
#[derive(Debug, Clone)]
pub(crate) struct RecursionTail {
    pub rows: usize,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
}

/// Outcome of evaluating one observation at a parameter row.
pub(crate) struct StepEval {
    pub scaled_score: Vec<f64>,
    pub loglik: f64,
}

/// Map a linked row to natural parameters, failing on support violations.
pub(crate) fn natural_checked(model: &Model, f_row: &[f64]) -> Option<Vec<f64>> {
    if f_row.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let natural = model.natural_row(f_row);
    if natural.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if crate::distribution::check_params_with_supports(model.dist.as_ref(), &natural).is_err() {
        return None;
    }
    Some(natural)
}

/// Evaluate the link-space scaled score (and log-likelihood) of `y` at a
/// parameter row. Returns `None` on any numeric failure.
pub(crate) fn eval_step(model: &Model, natural: &[f64], y: f64) -> Option<StepEval> {
    let k = model.param_count();
    let dist = model.dist.as_ref();
    if !dist.in_sample_space(y) {
        return None;
    }
    let ll = dist.loglik(y, natural);
    if ll.is_nan() || ll == f64::INFINITY {
        return None;
    }
    let mut raw = vec![0.0; k];
    dist.score(y, natural, &mut raw);
    let desc = dist.descriptor();
    for i in 0..k {
        if model.par_link[i] {
            raw[i] *= crate::distribution::link_jacobian(desc.param_supports[i], natural[i]);
        }
        if !raw[i].is_finite() {
            return None;
        }
    }
    let scaled = if model.scaling.needs_fisher() {
        let mut info = dist.fisher(natural);
        for i in 0..k {
            for j in 0..k {
                let ji = if model.par_link[i] {
                    crate::distribution::link_jacobian(desc.param_supports[i], natural[i])
                } else {
                    1.0
                };
                let jj = if model.par_link[j] {
                    crate::distribution::link_jacobian(desc.param_supports[j], natural[j])
                } else {
                    1.0
                };
                info[(i, j)] *= ji * jj;
            }
        }
        scale_score(model, &raw, &info)
    } else {
        scale_score(model, &raw, &DMatrix::zeros(0, 0))
    };
    if scaled.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(StepEval { scaled_score: scaled, loglik: ll })
}

/// Initialization vector actually used by the filter: `par_init` where
/// supplied (static entries always take their level), otherwise the
/// long-term value.
pub(crate) fn init_vector(model: &Model, coef: &CoefSet, x_means: &[Vec<f64>]) -> Result<Vec<f64>> {
    let view = model.coef_view(&coef.values);
    match &model.par_init {
        Some(pi) => {
            let mut init = pi.clone();
            for i in 0..model.param_count() {
                if model.par_static[i] {
                    init[i] = view.level(i);
                }
            }
            Ok(init)
        }
        None => long_term_init(model, coef, x_means),
    }
}

/// Run the score-driven recursion over a series.
///
/// Initialization rows are pinned to `par_init` (if given) or the
/// long-term value; missing observations contribute a zero score and no
/// likelihood term, and the recursion advances on the remaining terms.
/// The first `lik_skip` non-missing likelihood contributions are excluded
/// from `loglik_sum`.
pub fn filter_pass(
    model: &Model,
    coef: &CoefSet,
    data: &SeriesData,
    lik_skip: usize,
) -> Result<FilterOutput> {
    data.validate(model)?;
    if coef.values.len() != model.coef_count() {
        return Err(Error::Dimension("coefficient vector length mismatch".into()));
    }
    let t_len = data.len();
    if lik_skip >= t_len {
        return Err(Error::spec(format!(
            "lik_skip = {lik_skip} must be smaller than the series length {t_len}"
        )));
    }
    let k = model.param_count();
    let x_means = data.x_means(model);
    let init = init_vector(model, coef, &x_means)?;
    let view = model.coef_view(&coef.values);

    let mut rec = Recursion::new(model, &coef.values, init.clone(), t_len);
    let mut loglik_t: Vec<Option<f64>> = Vec::with_capacity(t_len);
    let mut failed_at = None;

    let mut reg = vec![0.0; k];
    for t in 0..t_len {
        for i in 0..k {
            reg[i] = view.regression_term(i, data.x_row(i, t));
        }
        let f_row = rec.push_row(&reg).to_vec();
        let natural = match natural_checked(model, &f_row) {
            Some(n) => n,
            None => {
                failed_at = Some(t);
                break;
            }
        };
        match data.y[t] {
            None => {
                loglik_t.push(None);
                rec.set_score(&vec![0.0; k]);
            }
            Some(y) => match eval_step(model, &natural, y) {
                Some(step) => {
                    loglik_t.push(Some(step.loglik));
                    rec.set_score(&step.scaled_score);
                }
                None => {
                    failed_at = Some(t);
                    break;
                }
            },
        }
    }

    let computed = rec.len();
    let mut par_tv = Mat::zeros(t_len, k);
    let mut score_tv = Mat::zeros(t_len, k);
    let mut err_tv = (model.regress == RegressMode::Sep).then(|| Mat::zeros(t_len, k));
    for t in 0..t_len {
        if t < computed {
            par_tv.row_mut(t).copy_from_slice(rec.row_f(t));
            if t * k < rec.u.len() {
                score_tv.row_mut(t).copy_from_slice(&rec.u[t * k..(t + 1) * k]);
            }
            if let Some(err) = &mut err_tv {
                if t * k < rec.e.len() {
                    err.row_mut(t).copy_from_slice(&rec.e[t * k..(t + 1) * k]);
                }
            }
        } else {
            for v in par_tv.row_mut(t) {
                *v = f64::NAN;
            }
            for v in score_tv.row_mut(t) {
                *v = f64::NAN;
            }
        }
    }
    while loglik_t.len() < t_len {
        loglik_t.push(None);
    }

    let (loglik_sum, n_eff) = if failed_at.is_some() {
        (f64::NEG_INFINITY, 0)
    } else {
        let mut sum = 0.0;
        let mut included = 0usize;
        let mut seen = 0usize;
        for ll in loglik_t.iter().flatten() {
            seen += 1;
            if seen > lik_skip {
                sum += ll;
                included += 1;
            }
        }
        if !sum.is_finite() {
            (f64::NEG_INFINITY, included)
        } else {
            (sum, included)
        }
    };

    Ok(FilterOutput {
        par_tv,
        score_tv,
        err_tv,
        loglik_t,
        loglik_sum,
        f_bar: init,
        n_eff,
        failed_at,
    })
}
