//! Coefficient bookkeeping: fixed values, linear ties, named structures,
//! bounds, and the affine expansion from the free subvector to the full
//! coefficient vector.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Model;
use crate::error::{Error, Result};

/// Named coefficient structures lowered to fix/tie entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialConstraint {
    /// Tie alpha and phi coefficients equal across time-varying parameters.
    PanelStructure,
    /// Intercepts of time-varying parameters sum to zero.
    ZeroSumIntercept,
    /// Per time-varying parameter: omega fixed at 0, phi1 fixed at 1.
    RandomWalk,
}

/// Restrictions on estimated coefficients.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSpec {
    /// Fixed values; `None` marks an estimated coefficient. Empty = none.
    pub fix_value: Vec<Option<f64>>,
    /// Square matrix of multipliers: row r (a fixed coefficient) takes the
    /// value `fix_value[r] + sum_c fix_other[r][c] * theta_c` over
    /// estimated columns c. Empty = none.
    pub fix_other: Vec<Vec<Option<f64>>>,
    pub special: Vec<SpecialConstraint>,
    /// Per-coefficient bounds. Empty = unbounded.
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl ConstraintSpec {
    pub fn none() -> Self {
        ConstraintSpec::default()
    }

    pub fn is_empty(&self) -> bool {
        self.fix_value.iter().all(Option::is_none)
            && self.fix_other.iter().all(|r| r.iter().all(Option::is_none))
            && self.special.is_empty()
            && self.lower.iter().all(Option::is_none)
            && self.upper.iter().all(Option::is_none)
    }
}

/// Index of a coefficient by its canonical label.
pub fn coef_index(model: &Model, name: &str) -> Result<usize> {
    model
        .coef_labels()
        .iter()
        .position(|l| l == name)
        .ok_or_else(|| Error::Constraint(format!("unknown coefficient name `{name}`")))
}

/// The lowered constraint system: labels, the free index set, and the
/// affine expansion map.
#[derive(Debug, Clone)]
pub struct Structure {
    pub labels: Vec<String>,
    /// Indices of estimated coefficients, in coefficient order.
    pub free: Vec<usize>,
    n: usize,
    base: Vec<f64>,
    /// (fixed coefficient, position in `free`, multiplier).
    ties: Vec<(usize, usize, f64)>,
    fixed: Vec<bool>,
    pub lower_free: Vec<f64>,
    pub upper_free: Vec<f64>,
}

impl Structure {
    pub fn n_coef(&self) -> usize {
        self.n
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_fixed(&self, idx: usize) -> bool {
        self.fixed[idx]
    }

    /// Expand a free subvector to the full coefficient vector.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        debug_assert_eq!(free.len(), self.free.len());
        let mut full = self.base.clone();
        for (pos, &idx) in self.free.iter().enumerate() {
            full[idx] = free[pos];
        }
        for &(row, pos, mult) in &self.ties {
            full[row] += mult * free[pos];
        }
        full
    }

    /// Extract the free entries of a full coefficient vector.
    pub fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    /// Clamp a free subvector into its bounds.
    pub fn clamp_free(&self, free: &mut [f64]) {
        for (v, (lo, hi)) in free.iter_mut().zip(self.lower_free.iter().zip(&self.upper_free)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// The linear part A of the expansion, full = base + A free.
    pub fn expansion_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.free.len());
        for (pos, &idx) in self.free.iter().enumerate() {
            a[(idx, pos)] = 1.0;
        }
        for &(row, pos, mult) in &self.ties {
            a[(row, pos)] += mult;
        }
        a
    }
}

fn normalize<T: Clone>(v: &[Option<T>], n: usize, what: &str) -> Result<Vec<Option<T>>> {
    if v.is_empty() {
        return Ok(vec![None; n]);
    }
    if v.len() != n {
        return Err(Error::Dimension(format!(
            "{what} has length {}, expected {n}",
            v.len()
        )));
    }
    Ok(v.to_vec())
}

fn set_fix(
    fix_value: &mut [Option<f64>],
    idx: usize,
    value: f64,
    labels: &[String],
    origin: &str,
) -> Result<()> {
    if fix_value[idx].is_some() {
        return Err(Error::Constraint(format!(
            "{origin} conflicts with an existing fix on `{}`",
            labels[idx]
        )));
    }
    fix_value[idx] = Some(value);
    Ok(())
}

/// Lower the constraint system against a model's coefficient layout.
pub fn build_structure(model: &Model, constraints: &ConstraintSpec) -> Result<Structure> {
    let n = model.coef_count();
    let labels = model.coef_labels().to_vec();
    let mut fix_value = normalize(&constraints.fix_value, n, "fix_value")?;
    let mut fix_other: Vec<Vec<Option<f64>>> = if constraints.fix_other.is_empty() {
        vec![vec![None; n]; n]
    } else {
        if constraints.fix_other.len() != n
            || constraints.fix_other.iter().any(|r| r.len() != n)
        {
            return Err(Error::Dimension(format!("fix_other must be {n} x {n}")));
        }
        constraints.fix_other.clone()
    };
    let lower = normalize(&constraints.lower, n, "lower bounds")?;
    let upper = normalize(&constraints.upper, n, "upper bounds")?;

    // Lower the named specials onto fix_value / fix_other.
    let tv = model.tv_params();
    let find = |name: String| -> usize {
        labels.iter().position(|l| *l == name).expect("label generated from the model")
    };
    for special in &constraints.special {
        match special {
            SpecialConstraint::RandomWalk => {
                for &i in tv {
                    if model.q[i] < 1 {
                        return Err(Error::Constraint(format!(
                            "random_walk needs q >= 1 on parameter `{}`",
                            model.dist.descriptor().param_names[i]
                        )));
                    }
                    let w = model.wrapped_name(i);
                    set_fix(&mut fix_value, find(format!("{w}_omega")), 0.0, &labels, "random_walk")?;
                    set_fix(&mut fix_value, find(format!("{w}_phi1")), 1.0, &labels, "random_walk")?;
                }
            }
            SpecialConstraint::ZeroSumIntercept => {
                if tv.len() < 2 {
                    return Err(Error::Constraint(
                        "zero_sum_intercept needs at least two time-varying parameters".into(),
                    ));
                }
                let last = *tv.last().unwrap();
                let row = find(format!("{}_omega", model.wrapped_name(last)));
                set_fix(&mut fix_value, row, 0.0, &labels, "zero_sum_intercept")?;
                for &i in &tv[..tv.len() - 1] {
                    let col = find(format!("{}_omega", model.wrapped_name(i)));
                    fix_other[row][col] = Some(-1.0);
                }
            }
            SpecialConstraint::PanelStructure => {
                if tv.len() < 2 {
                    return Err(Error::Constraint(
                        "panel_structure needs at least two time-varying parameters".into(),
                    ));
                }
                let first = tv[0];
                for &i in &tv[1..] {
                    if model.p[i] != model.p[first] || model.q[i] != model.q[first] {
                        return Err(Error::Constraint(
                            "panel_structure needs equal score/autoregressive orders".into(),
                        ));
                    }
                    let (wi, wf) = (model.wrapped_name(i), model.wrapped_name(first));
                    for j in 1..=model.p[i] {
                        let row = find(format!("{wi}_alpha{j}"));
                        set_fix(&mut fix_value, row, 0.0, &labels, "panel_structure")?;
                        fix_other[row][find(format!("{wf}_alpha{j}"))] = Some(1.0);
                    }
                    for j in 1..=model.q[i] {
                        let row = find(format!("{wi}_phi{j}"));
                        set_fix(&mut fix_value, row, 0.0, &labels, "panel_structure")?;
                        fix_other[row][find(format!("{wf}_phi{j}"))] = Some(1.0);
                    }
                }
            }
        }
    }

    let fixed: Vec<bool> = fix_value.iter().map(Option::is_some).collect();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let free_pos: Vec<Option<usize>> = {
        let mut pos = vec![None; n];
        for (p, &i) in free.iter().enumerate() {
            pos[i] = Some(p);
        }
        pos
    };

    // Validate fix_other: rows only on fixed coefficients, columns only on
    // estimated ones (a tie to a fixed coefficient would chain).
    let mut ties = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if let Some(mult) = fix_other[r][c] {
                if !fixed[r] {
                    return Err(Error::Constraint(format!(
                        "fix_other row `{}` corresponds to an estimated coefficient",
                        labels[r]
                    )));
                }
                if fixed[c] {
                    return Err(Error::Constraint(format!(
                        "fix_other ties `{}` to `{}`, which is itself fixed",
                        labels[r], labels[c]
                    )));
                }
                ties.push((r, free_pos[c].unwrap(), mult));
            }
        }
    }

    // Bounds.
    let mut lower_free = Vec::with_capacity(free.len());
    let mut upper_free = Vec::with_capacity(free.len());
    for &i in &free {
        let lo = lower[i].unwrap_or(f64::NEG_INFINITY);
        let hi = upper[i].unwrap_or(f64::INFINITY);
        if lo > hi {
            return Err(Error::Constraint(format!(
                "lower bound exceeds upper bound on `{}`",
                labels[i]
            )));
        }
        lower_free.push(lo);
        upper_free.push(hi);
    }
    for i in 0..n {
        if let Some(v) = fix_value[i] {
            let lo = lower[i].unwrap_or(f64::NEG_INFINITY);
            let hi = upper[i].unwrap_or(f64::INFINITY);
            if v < lo || v > hi {
                return Err(Error::Constraint(format!(
                    "fixed value {v} violates the bounds on `{}`",
                    labels[i]
                )));
            }
        }
    }

    let base: Vec<f64> = fix_value.iter().map(|v| v.unwrap_or(0.0)).collect();
    Ok(Structure { labels, free, n, base, ties, fixed, lower_free, upper_free })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::registry;
    use crate::dynamics::{ModelSpec, RegressMode};
    use approx::assert_relative_eq;

    fn negbin_case_model() -> Model {
        let spec = ModelSpec::new("negbin").regress(RegressMode::Sep).regressors(7);
        Model::from_spec(&spec, registry()).unwrap()
    }

    #[test]
    fn unconstrained_structure_is_identity() {
        let model = negbin_case_model();
        let s = build_structure(&model, &ConstraintSpec::none()).unwrap();
        assert_eq!(s.n_coef(), 11);
        assert_eq!(s.n_free(), 11);
        assert_eq!(s.labels.last().unwrap(), "dispersion");
        assert_eq!(s.labels[9], "log(mean)_phi1");
        let full = s.expand(&(0..11).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(full[3], 3.0);
    }

    #[test]
    fn fix_value_expansion() {
        let model = negbin_case_model();
        let mut c = ConstraintSpec::none();
        c.fix_value = vec![None; 11];
        c.fix_value[8] = Some(0.05); // log(mean)_alpha1
        let s = build_structure(&model, &c).unwrap();
        assert_eq!(s.n_free(), 10);
        let full = s.expand(&vec![1.0; 10]);
        assert_relative_eq!(full[8], 0.05);
        assert!(s.is_fixed(8));
    }

    #[test]
    fn random_walk_lowering() {
        let spec = ModelSpec::new("pois");
        let model = Model::from_spec(&spec, registry()).unwrap();
        let mut c = ConstraintSpec::none();
        c.special.push(SpecialConstraint::RandomWalk);
        let s = build_structure(&model, &c).unwrap();
        // omega fixed at 0, phi1 fixed at 1, alpha1 left free.
        assert_eq!(s.n_free(), 1);
        assert_eq!(s.free, vec![1]);
        let full = s.expand(&[0.2]);
        assert_eq!(full, vec![0.0, 0.2, 1.0]);
    }

    #[test]
    fn zero_sum_intercept_ties() {
        let spec = ModelSpec::new("norm").par_static(vec![false, false]);
        let model = Model::from_spec(&spec, registry()).unwrap();
        let mut c = ConstraintSpec::none();
        c.special.push(SpecialConstraint::ZeroSumIntercept);
        let s = build_structure(&model, &c).unwrap();
        let free = s.reduce(&vec![0.0; 8]);
        let mut free = free;
        // mean_omega is free index 0; var omega is fixed to -mean_omega.
        free[0] = 0.7;
        let full = s.expand(&free);
        let mean_omega = model.coef_labels().iter().position(|l| l == "mean_omega").unwrap();
        let var_omega =
            model.coef_labels().iter().position(|l| l == "log(variance)_omega").unwrap();
        assert_relative_eq!(full[mean_omega], 0.7);
        assert_relative_eq!(full[var_omega], -0.7);
    }

    #[test]
    fn panel_structure_ties_dynamics() {
        let spec = ModelSpec::new("norm").par_static(vec![false, false]);
        let model = Model::from_spec(&spec, registry()).unwrap();
        let mut c = ConstraintSpec::none();
        c.special.push(SpecialConstraint::PanelStructure);
        let s = build_structure(&model, &c).unwrap();
        assert_eq!(s.n_free(), 4); // two omegas + shared alpha1 + shared phi1
        let labels = model.coef_labels();
        let a1 = labels.iter().position(|l| l == "mean_alpha1").unwrap();
        let a2 = labels.iter().position(|l| l == "log(variance)_alpha1").unwrap();
        let mut free = vec![0.0; 4];
        let a1_pos = s.free.iter().position(|&i| i == a1).unwrap();
        free[a1_pos] = 0.12;
        let full = s.expand(&free);
        assert_relative_eq!(full[a2], 0.12);
    }

    #[test]
    fn tie_to_fixed_coefficient_rejected() {
        let model = negbin_case_model();
        let mut c = ConstraintSpec::none();
        c.fix_value = vec![None; 11];
        c.fix_value[0] = Some(1.0);
        c.fix_value[1] = Some(0.0);
        c.fix_other = vec![vec![None; 11]; 11];
        c.fix_other[1][0] = Some(2.0); // ties a fixed coef to a fixed coef
        assert!(build_structure(&model, &c).is_err());
    }

    #[test]
    fn fix_other_row_on_estimated_rejected() {
        let model = negbin_case_model();
        let mut c = ConstraintSpec::none();
        c.fix_other = vec![vec![None; 11]; 11];
        c.fix_other[1][0] = Some(2.0);
        assert!(build_structure(&model, &c).is_err());
    }

    #[test]
    fn incompatible_special_rejected() {
        let spec = ModelSpec::new("pois");
        let model = Model::from_spec(&spec, registry()).unwrap();
        let mut c = ConstraintSpec::none();
        c.special.push(SpecialConstraint::ZeroSumIntercept);
        assert!(build_structure(&model, &c).is_err());
    }

    #[test]
    fn fixed_value_must_respect_bounds() {
        let spec = ModelSpec::new("pois");
        let model = Model::from_spec(&spec, registry()).unwrap();
        let mut c = ConstraintSpec::none();
        c.fix_value = vec![None, Some(0.5), None];
        c.upper = vec![None, Some(0.2), None];
        assert!(build_structure(&model, &c).is_err());
    }
}
