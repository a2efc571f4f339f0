//! Normal distribution, mean/variance parametrization.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

const LN_2PI: f64 = 1.8378770664093453;

pub struct Normal {
    desc: DistributionDescriptor,
}

impl Normal {
    pub fn new() -> Self {
        Normal {
            desc: DistributionDescriptor::new(
                "norm",
                "Normal",
                "meanvar",
                "Mean-Variance",
                DataType::Real,
                &["mean", "variance"],
                &[Support::Real, Support::Positive],
                true,
            ),
        }
    }
}

impl ScoreDistribution for Normal {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, _f: &[f64]) -> Result<()> {
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite()
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let (mu, v) = (f[0], f[1]);
        -0.5 * (LN_2PI + v.ln()) - (y - mu) * (y - mu) / (2.0 * v)
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[1]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu, v) = (f[0], f[1]);
        let r = y - mu;
        out[0] = r / v;
        out[1] = -0.5 / v + r * r / (2.0 * v * v);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let v = f[1];
        DMatrix::from_row_slice(2, 2, &[1.0 / v, 0.0, 0.0, 0.5 / (v * v)])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        f[0] + f[1].sqrt() * z
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        vec![mean, var.max(1e-6)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(Normal::new())
    }

    #[test]
    fn density_at_mode() {
        for v in [0.5, 1.0, 3.7] {
            let p = distribution::density(&dist(), 1.2, &NaturalParams(vec![1.2, v])).unwrap();
            assert_relative_eq!(
                p,
                1.0 / (2.0 * std::f64::consts::PI * v).sqrt(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn fisher_is_diagonal() {
        let i = distribution::fisher(&dist(), &NaturalParams(vec![0.0, 2.0]), &[false, false])
            .unwrap();
        assert_relative_eq!(i[(0, 0)], 0.5);
        assert_relative_eq!(i[(1, 1)], 0.125);
        assert_eq!(i[(0, 1)], 0.0);
    }

    #[test]
    fn start_population_variance() {
        let s = dist().start(&[0.0, 2.0]);
        assert_relative_eq!(s[0], 1.0);
        assert_relative_eq!(s[1], 1.0);
    }
}
