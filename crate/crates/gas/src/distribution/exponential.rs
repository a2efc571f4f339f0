//! Exponential distribution, scale parametrization (mean = scale).

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Exponential {
    desc: DistributionDescriptor,
}

impl Exponential {
    pub fn new() -> Self {
        Exponential {
            desc: DistributionDescriptor::new(
                "exp",
                "Exponential",
                "scale",
                "Scale",
                DataType::Duration,
                &["scale"],
                &[Support::Positive],
                true,
            ),
        }
    }
}

impl ScoreDistribution for Exponential {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, _f: &[f64]) -> Result<()> {
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite() && y >= 0.0
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let s = f[0];
        -s.ln() - y / s
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0] * f[0]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let s = f[0];
        out[0] = (y - s) / (s * s);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0 / (f[0] * f[0]))
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let e: f64 = rand_distr::Exp1.sample(rng);
        f[0] * e
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
        Arc::new(Exponential::new())
    }

    #[test]
    fn density_integrates_to_one() {
        let d = dist();
        let f = NaturalParams(vec![1.7]);
        // Trapezoid over a generous range.
        let h = 1e-3;
        let total: f64 = (0..40_000)
            .map(|i| {
                let y = i as f64 * h;
                distribution::density(&d, y, &f).unwrap() * h
            })
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn score_and_fisher() {
        let d = dist();
        let f = NaturalParams(vec![2.0]);
        let s = distribution::score(&d, 3.0, &f, &[false]).unwrap();
        assert_relative_eq!(s[0], 0.25);
        let i = distribution::fisher(&d, &f, &[false]).unwrap();
        assert_relative_eq!(i[(0, 0)], 0.25);
        // Log link multiplies the information by s^2, giving 1.
        let i = distribution::fisher(&d, &f, &[true]).unwrap();
        assert_relative_eq!(i[(0, 0)], 1.0);
    }

    #[test]
    fn zero_duration_allowed() {
        let p = distribution::density(&dist(), 0.0, &NaturalParams(vec![2.0])).unwrap();
        assert_relative_eq!(p, 0.5);
    }
}
