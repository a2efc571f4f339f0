//! Laplace distribution, mean/scale parametrization.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::error::Result;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Laplace {
    desc: DistributionDescriptor,
}

impl Laplace {
    pub fn new() -> Self {
        Laplace {
            desc: DistributionDescriptor::new(
                "laplace",
                "Laplace",
                "meanscale",
                "Mean-Scale",
                DataType::Real,
                &["mean", "scale"],
                &[Support::Real, Support::Positive],
                true,
            ),
        }
    }
}

impl ScoreDistribution for Laplace {
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
        let (mu, b) = (f[0], f[1]);
        -(2.0 * b).ln() - (y - mu).abs() / b
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        2.0 * f[1] * f[1]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu, b) = (f[0], f[1]);
        let r = y - mu;
        out[0] = r.signum() / b;
        out[1] = r.abs() / (b * b) - 1.0 / b;
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let b2 = f[1] * f[1];
        DMatrix::from_row_slice(2, 2, &[1.0 / b2, 0.0, 0.0, 1.0 / b2])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.gen::<f64>() - 0.5;
        f[0] - f[1] * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        vec![mean, (var / 2.0).sqrt().max(1e-6)]
    }
}
