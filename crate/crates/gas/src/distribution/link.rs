//! Link functions: log for positive parameters, logit for unit-interval
//! parameters, identity otherwise. Scores and Fisher matrices are
//! transported into link space through the inverse-link Jacobian.

use crate::error::{Error, Result};

use super::{DistributionDescriptor, LinkedParams, NaturalParams, Support};

pub(crate) fn validate_mask(desc: &DistributionDescriptor, mask: &[bool]) -> Result<()> {
    if mask.len() != desc.param_count {
        return Err(Error::Dimension(format!(
            "link mask has length {}, expected {}",
            mask.len(),
            desc.param_count
        )));
    }
    for (i, &m) in mask.iter().enumerate() {
        if m && !desc.param_supports[i].has_default_link() {
            return Err(Error::spec(format!(
                "parameter `{}` has {:?} support; no link is defined for it",
                desc.param_names[i], desc.param_supports[i]
            )));
        }
    }
    Ok(())
}

/// Natural -> link space for one component.
#[inline]
pub(crate) fn apply_component(support: Support, x: f64) -> f64 {
    match support {
        Support::Positive => x.ln(),
        Support::UnitInterval => (x / (1.0 - x)).ln(),
        _ => x,
    }
}

/// Link -> natural space for one component.
#[inline]
pub(crate) fn inverse_component(support: Support, x: f64) -> f64 {
    match support {
        Support::Positive => x.exp(),
        Support::UnitInterval => 1.0 / (1.0 + (-x).exp()),
        _ => x,
    }
}

/// Jacobian d(natural)/d(linked) evaluated at the natural value.
#[inline]
pub(crate) fn jacobian(support: Support, natural: f64) -> f64 {
    match support {
        Support::Positive => natural,
        Support::UnitInterval => natural * (1.0 - natural),
        _ => 1.0,
    }
}

/// Apply the masked links to a natural parameter vector.
pub fn link_apply(
    desc: &DistributionDescriptor,
    p: &NaturalParams,
    mask: &[bool],
) -> Result<LinkedParams> {
    validate_mask(desc, mask)?;
    if p.0.len() != desc.param_count {
        return Err(Error::Dimension("parameter vector length mismatch".into()));
    }
    Ok(LinkedParams(
        p.0.iter()
            .enumerate()
            .map(|(i, &v)| {
                if mask[i] {
                    apply_component(desc.param_supports[i], v)
                } else {
                    v
                }
            })
            .collect(),
    ))
}

/// Invert the masked links.
pub fn link_inverse(
    desc: &DistributionDescriptor,
    q: &LinkedParams,
    mask: &[bool],
) -> Result<NaturalParams> {
    validate_mask(desc, mask)?;
    if q.0.len() != desc.param_count {
        return Err(Error::Dimension("parameter vector length mismatch".into()));
    }
    Ok(NaturalParams(
        q.0.iter()
            .enumerate()
            .map(|(i, &v)| {
                if mask[i] {
                    inverse_component(desc.param_supports[i], v)
                } else {
                    v
                }
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::registry;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_log_link() {
        let d = registry().resolve("pois", None).unwrap();
        let linked = link_apply(d.descriptor(), &NaturalParams(vec![1.0]), &[true]).unwrap();
        assert_eq!(linked.0, vec![0.0]);
    }

    #[test]
    fn bernoulli_logit_link() {
        let d = registry().resolve("bernoulli", None).unwrap();
        let linked = link_apply(d.descriptor(), &NaturalParams(vec![0.5]), &[true]).unwrap();
        assert_eq!(linked.0, vec![0.0]);
    }

    #[test]
    fn normal_partial_mask() {
        let d = registry().resolve("norm", None).unwrap();
        let linked =
            link_apply(d.descriptor(), &NaturalParams(vec![3.0, 2.0]), &[false, true]).unwrap();
        assert_eq!(linked.0[0], 3.0);
        assert_relative_eq!(linked.0[1], 2.0_f64.ln());
    }

    #[test]
    fn mask_on_real_support_rejected() {
        let d = registry().resolve("norm", None).unwrap();
        assert!(link_apply(d.descriptor(), &NaturalParams(vec![0.0, 1.0]), &[true, true]).is_err());
    }

    #[test]
    fn round_trip_tight() {
        let d = registry().resolve("norm", None).unwrap();
        for &v in &[1e-8, 0.3, 1.0, 17.5, 4e7] {
            let p = NaturalParams(vec![-2.0, v]);
            let q = link_apply(d.descriptor(), &p, &[false, true]).unwrap();
            let back = link_inverse(d.descriptor(), &q, &[false, true]).unwrap();
            assert_relative_eq!(back.0[1], v, max_relative = 1e-12);
        }
        let b = registry().resolve("bernoulli", None).unwrap();
        for &v in &[1e-9, 0.2, 0.5, 0.97, 1.0 - 1e-9] {
            let q = link_apply(b.descriptor(), &NaturalParams(vec![v]), &[true]).unwrap();
            let back = link_inverse(b.descriptor(), &q, &[true]).unwrap();
            assert_relative_eq!(back.0[0], v, max_relative = 1e-12);
        }
    }
}
