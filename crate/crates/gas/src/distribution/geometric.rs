//! Geometric distribution (number of failures before the first success),
//! mean parametrization: success probability 1/(1+mean).

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Geometric {
    desc: DistributionDescriptor,
}

impl Geometric {
    pub fn new() -> Self {
        Geometric {
            desc: DistributionDescriptor::new(
                "geom",
                "Geometric",
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

impl ScoreDistribution for Geometric {
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
        let m = f[0];
        y * m.ln() - (y + 1.0) * m.ln_1p()
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0] * (1.0 + f[0])
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let m = f[0];
        out[0] = (y - m) / (m * (1.0 + m));
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let m = f[0];
        DMatrix::from_element(1, 1, 1.0 / (m * (1.0 + m)))
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let p = 1.0 / (1.0 + f[0]);
        rand_distr::Geometric::new(p).expect("probability in (0,1)").sample(rng) as f64
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
        Arc::new(Geometric::new())
    }

    #[test]
    fn loglik_anchor() {
        // Success probability 1/(1+mean) = 0.5 at mean 1, so P(y=0) = 0.5.
        let ll = distribution::loglik(&dist(), 0.0, &NaturalParams(vec![1.0])).unwrap();
        assert_relative_eq!(ll, 0.5_f64.ln());
    }

    #[test]
    fn pmf_sums_to_one() {
        let d = dist();
        let f = NaturalParams(vec![2.0]);
        let total: f64 =
            (0..400).map(|y| distribution::density(&d, y as f64, &f).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn variance_formula() {
        let v = distribution::dist_variance(&dist(), &NaturalParams(vec![2.0])).unwrap();
        assert_relative_eq!(v, 6.0);
    }

    #[test]
    fn sample_mean_matches() {
        let d = dist();
        let n = 200_000;
        let draws = distribution::random(&d, &NaturalParams(vec![2.0]), n, 5).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 4.0 * (6.0_f64 / n as f64).sqrt());
    }
}
