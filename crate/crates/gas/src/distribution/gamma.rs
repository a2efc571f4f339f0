//! Gamma distribution, scale parametrization (scale first, shape second).

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;
use crate::special::{digamma, ln_gamma, trigamma};

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct Gamma {
    desc: DistributionDescriptor,
}

impl Gamma {
    pub fn new() -> Self {
        Gamma {
            desc: DistributionDescriptor::new(
                "gamma",
                "Gamma",
                "scale",
                "Scale",
                DataType::Duration,
                &["scale", "shape"],
                &[Support::Positive, Support::Positive],
                false,
            ),
        }
    }
}

impl ScoreDistribution for Gamma {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, _f: &[f64]) -> Result<()> {
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite() && y > 0.0
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let (s, k) = (f[0], f[1]);
        (k - 1.0) * y.ln() - y / s - ln_gamma(k) - k * s.ln()
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0] * f[1]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0] * f[0] * f[1]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (s, k) = (f[0], f[1]);
        out[0] = (y - k * s) / (s * s);
        out[1] = y.ln() - s.ln() - digamma(k);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let (s, k) = (f[0], f[1]);
        DMatrix::from_row_slice(2, 2, &[k / (s * s), 1.0 / s, 1.0 / s, trigamma(k)])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        rand_distr::Gamma::new(f[1], f[0]).expect("positive parameters").sample(rng)
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = (y.iter().sum::<f64>() / n).max(1e-6);
        let var = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(1e-12);
        let shape = (mean * mean / var).max(1e-6);
        let scale = (var / mean).max(1e-6);
        vec![scale, shape]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(Gamma::new())
    }

    #[test]
    fn logpdf_reference() {
        let table = [(1.2, 1.5, 2.0, -1.4286086594223741), (0.3, 0.8, 0.7, -0.11847491931393878)];
        for (y, s, k, expected) in table {
            let ll = distribution::loglik(&dist(), y, &NaturalParams(vec![s, k])).unwrap();
            assert_relative_eq!(ll, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn fisher_closed_form() {
        // Verified against quadrature of the expected score outer product.
        let i = distribution::fisher(&dist(), &NaturalParams(vec![1.5, 2.0]), &[false, false])
            .unwrap();
        assert_relative_eq!(i[(0, 0)], 2.0 / 2.25, max_relative = 1e-12);
        assert_relative_eq!(i[(0, 1)], 1.0 / 1.5, max_relative = 1e-12);
        assert_relative_eq!(i[(1, 1)], 0.6449340668482266, max_relative = 1e-10);
    }

    #[test]
    fn zero_duration_rejected() {
        assert!(distribution::density(&dist(), 0.0, &NaturalParams(vec![1.0, 0.5])).is_err());
    }

    #[test]
    fn moments_and_start_roundtrip() {
        let d = dist();
        let f = NaturalParams(vec![0.5, 4.0]);
        assert_relative_eq!(distribution::dist_mean(&d, &f).unwrap(), 2.0);
        assert_relative_eq!(distribution::dist_variance(&d, &f).unwrap(), 1.0);
        let draws = distribution::random(&d, &f, 200_000, 17).unwrap();
        let opts: Vec<Option<f64>> = draws.iter().map(|&v| Some(v)).collect();
        let s = distribution::start_values(&d, &opts).unwrap();
        assert_relative_eq!(s.0[0], 0.5, max_relative = 0.05);
        assert_relative_eq!(s.0[1], 4.0, max_relative = 0.05);
    }
}
