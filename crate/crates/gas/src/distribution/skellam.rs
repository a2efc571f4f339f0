//! Skellam distribution (difference of two Poisson counts), mean/variance
//! parametrization. The underlying rates are mu1 = (v+m)/2, mu2 = (v-m)/2,
//! which requires v > |m|.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::{Error, Result};
use crate::special::{bessel_i_ratio, ln_bessel_i};

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Skellam {
    desc: DistributionDescriptor,
}

impl Skellam {
    pub fn new() -> Self {
        Skellam {
            desc: DistributionDescriptor::new(
                "skellam",
                "Skellam",
                "meanvar",
                "Mean-Variance",
                DataType::Integer,
                &["mean", "variance"],
                &[Support::Real, Support::Positive],
                false,
            ),
        }
    }

    fn rates(f: &[f64]) -> (f64, f64) {
        ((f[1] + f[0]) / 2.0, (f[1] - f[0]) / 2.0)
    }

    /// Score with respect to the underlying rates (mu1, mu2).
    fn rate_score(y: f64, mu1: f64, mu2: f64) -> (f64, f64) {
        let z = 2.0 * (mu1 * mu2).sqrt();
        let ratio = bessel_i_ratio(y.abs() as u32, z);
        let d1 = -1.0 + y / (2.0 * mu1) + ratio * (mu2 / mu1).sqrt();
        let d2 = -1.0 - y / (2.0 * mu2) + ratio * (mu1 / mu2).sqrt();
        (d1, d2)
    }
}

impl ScoreDistribution for Skellam {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, f: &[f64]) -> Result<()> {
        if f[1] <= f[0].abs() {
            return Err(Error::domain(format!(
                "skellam requires variance > |mean| (got mean {}, variance {})",
                f[0], f[1]
            )));
        }
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite() && y.fract() == 0.0
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let (mu1, mu2) = Self::rates(f);
        let z = 2.0 * (mu1 * mu2).sqrt();
        -f[1] + 0.5 * y * (mu1.ln() - mu2.ln()) + ln_bessel_i(y.abs() as u32, z)
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[1]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu1, mu2) = Self::rates(f);
        let (d1, d2) = Self::rate_score(y, mu1, mu2);
        out[0] = (d1 - d2) / 2.0;
        out[1] = (d1 + d2) / 2.0;
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        // No closed form; sum the expected outer product over the mass.
        let (m, v) = (f[0], f[1]);
        let half_width = (60.0 * v.sqrt() + 20.0).ceil();
        let lo = (m - half_width).floor() as i64;
        let hi = (m + half_width).ceil() as i64;
        let mut info = DMatrix::zeros(2, 2);
        let mut s = [0.0_f64; 2];
        for y in lo..=hi {
            let yf = y as f64;
            let p = self.loglik(yf, f).exp();
            if p == 0.0 {
                continue;
            }
            self.score(yf, f, &mut s);
            for i in 0..2 {
                for j in 0..2 {
                    info[(i, j)] += p * s[i] * s[j];
                }
            }
        }
        info
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let (mu1, mu2) = Self::rates(f);
        let a = rand_distr::Poisson::new(mu1).expect("positive rate").sample(rng);
        let b = rand_distr::Poisson::new(mu2).expect("positive rate").sample(rng);
        a - b
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let v = var.max(mean.abs() + 1e-6).max(1e-6);
        vec![mean, v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(Skellam::new())
    }

    #[test]
    fn logpmf_reference() {
        // scipy.stats.skellam.logpmf with mu1=(v+m)/2, mu2=(v-m)/2, frozen.
        let table = [
            (0.0, 0.8, 2.2, -1.3413456793169836),
            (3.0, 1.0, 3.0, -2.2348758093777814),
            (-2.0, -1.4, 3.0, -1.5669292913272972),
            (5.0, 3.5, 4.5, -2.030211366219414),
        ];
        for (y, m, v, expected) in table {
            let ll = distribution::loglik(&dist(), y, &NaturalParams(vec![m, v])).unwrap();
            assert_relative_eq!(ll, expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn score_reference() {
        let s = distribution::score(&dist(), 2.0, &NaturalParams(vec![0.8, 3.0]), &[false, false])
            .unwrap();
        assert_relative_eq!(s[0], 0.41123672361770813, max_relative = 1e-9);
        assert_relative_eq!(s[1], -0.04213771356640561, max_relative = 1e-7);
    }

    #[test]
    fn fisher_reference() {
        // Independent summation oracle (scipy + numerical gradients), frozen.
        let i = distribution::fisher(&dist(), &NaturalParams(vec![0.8, 3.0]), &[false, false])
            .unwrap();
        assert_relative_eq!(i[(0, 0)], 0.33702624, max_relative = 1e-6);
        assert_relative_eq!(i[(0, 1)], -0.01384842, max_relative = 1e-4);
        assert_relative_eq!(i[(1, 1)], 0.05193156, max_relative = 1e-5);
    }

    #[test]
    fn variance_must_dominate_mean() {
        assert!(
            distribution::loglik(&dist(), 0.0, &NaturalParams(vec![2.0, 1.5])).is_err()
        );
    }

    #[test]
    fn moments_parametrized_directly() {
        let f = NaturalParams(vec![1.0, 3.0]);
        assert_relative_eq!(distribution::dist_mean(&dist(), &f).unwrap(), 1.0);
        assert_relative_eq!(distribution::dist_variance(&dist(), &f).unwrap(), 3.0);
    }
}
