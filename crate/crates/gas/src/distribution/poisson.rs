//! Poisson distribution, mean parametrization.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;
use crate::special::ln_gamma;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Poisson {
    desc: DistributionDescriptor,
}

impl Poisson {
    pub fn new() -> Self {
        Poisson {
            desc: DistributionDescriptor::new(
                "pois",
                "Poisson",
                "mean",
                "Mean",
                DataType::Count,
                &["mean"],
                &[Support::Positive],
                true,
            ),
        }
    }
}

impl ScoreDistribution for Poisson {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, _f: &[f64]) -> Result<()> {
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite() && y >= 0.0 && y.fract() == 0.0
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let lambda = f[0];
        -lambda + y * lambda.ln() - ln_gamma(y + 1.0)
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        out[0] = y / f[0] - 1.0;
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0 / f[0])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        rand_distr::Poisson::new(f[0]).expect("positive mean").sample(rng)
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        vec![mean.max(1e-6)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(Poisson::new())
    }

    #[test]
    fn density_at_zero() {
        let p = distribution::density(&dist(), 0.0, &NaturalParams(vec![2.0])).unwrap();
        assert_relative_eq!(p, (-2.0_f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn pmf_sums_to_one() {
        let d = dist();
        let f = NaturalParams(vec![2.0]);
        let total: f64 =
            (0..=50).map(|y| distribution::density(&d, y as f64, &f).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn loglik_at_zero() {
        let ll = distribution::loglik(&dist(), 0.0, &NaturalParams(vec![2.0])).unwrap();
        assert_relative_eq!(ll, -2.0);
    }

    #[test]
    fn score_unlinked_and_linked() {
        let d = dist();
        let f = NaturalParams(vec![2.0]);
        let s = distribution::score(&d, 3.0, &f, &[false]).unwrap();
        assert_relative_eq!(s[0], 0.5);
        let s = distribution::score(&d, 3.0, &f, &[true]).unwrap();
        assert_relative_eq!(s[0], 1.0);
    }

    #[test]
    fn fisher_unlinked_and_linked() {
        let d = dist();
        let f = NaturalParams(vec![4.0]);
        let i = distribution::fisher(&d, &f, &[false]).unwrap();
        assert_relative_eq!(i[(0, 0)], 0.25);
        let i = distribution::fisher(&d, &f, &[true]).unwrap();
        assert_relative_eq!(i[(0, 0)], 4.0);
    }

    #[test]
    fn start_is_sample_mean() {
        let s = dist().start(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(s[0], 2.0);
    }

    #[test]
    fn sample_mean_clt_band() {
        let d = dist();
        let n = 1_000_000;
        let draws = distribution::random(&d, &NaturalParams(vec![3.0]), n, 11).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 4.0 * (3.0_f64 / n as f64).sqrt());
    }
}
