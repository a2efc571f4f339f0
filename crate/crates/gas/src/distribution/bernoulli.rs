//! Bernoulli distribution, probability parametrization.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::error::Result;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Bernoulli {
    desc: DistributionDescriptor,
}

impl Bernoulli {
    pub fn new() -> Self {
        Bernoulli {
            desc: DistributionDescriptor::new(
                "bernoulli",
                "Bernoulli",
                "prob",
                "Probability",
                DataType::Binary,
                &["prob"],
                &[Support::UnitInterval],
                true,
            ),
        }
    }
}

impl ScoreDistribution for Bernoulli {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, _f: &[f64]) -> Result<()> {
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y == 0.0 || y == 1.0
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let p = f[0];
        if y == 1.0 {
            p.ln()
        } else {
            (1.0 - p).ln()
        }
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0] * (1.0 - f[0])
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let p = f[0];
        out[0] = (y - p) / (p * (1.0 - p));
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let p = f[0];
        DMatrix::from_element(1, 1, 1.0 / (p * (1.0 - p)))
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        if rng.gen::<f64>() < f[0] {
            1.0
        } else {
            0.0
        }
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        vec![mean.clamp(1e-6, 1.0 - 1e-6)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(Bernoulli::new())
    }

    #[test]
    fn mass_is_parameter() {
        let p = distribution::density(&dist(), 1.0, &NaturalParams(vec![0.3])).unwrap();
        assert_relative_eq!(p, 0.3, max_relative = 1e-15);
    }

    #[test]
    fn loglik_of_failure() {
        let ll = distribution::loglik(&dist(), 0.0, &NaturalParams(vec![0.3])).unwrap();
        assert_relative_eq!(ll, 0.7_f64.ln());
    }

    #[test]
    fn moments() {
        let d = dist();
        let f = NaturalParams(vec![0.3]);
        assert_relative_eq!(distribution::dist_mean(&d, &f).unwrap(), 0.3);
        assert_relative_eq!(distribution::dist_variance(&d, &f).unwrap(), 0.21);
    }

    #[test]
    fn fisher_at_half() {
        let i = distribution::fisher(&dist(), &NaturalParams(vec![0.5]), &[false]).unwrap();
        assert_relative_eq!(i[(0, 0)], 4.0);
    }

    #[test]
    fn start_clamps_boundary() {
        assert_relative_eq!(dist().start(&[0.0, 0.0, 0.0])[0], 1e-6);
        assert_relative_eq!(dist().start(&[1.0, 1.0])[0], 1.0 - 1e-6);
    }
}
