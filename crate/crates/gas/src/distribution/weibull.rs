//! Weibull distribution, scale parametrization (scale first, shape second).

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;
use crate::special::ln_gamma;

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

const EULER_GAMMA: f64 = 0.5772156649015329;

pub struct Weibull {
    desc: DistributionDescriptor,
}

impl Weibull {
    pub fn new() -> Self {
        Weibull {
            desc: DistributionDescriptor::new(
                "weibull",
                "Weibull",
                "scale",
                "Scale",
                DataType::Duration,
                &["scale", "shape"],
                &[Support::Positive, Support::Positive],
                false,
            ),
        }
    }

    fn gamma_fn(x: f64) -> f64 {
        ln_gamma(x).exp()
    }
}

impl ScoreDistribution for Weibull {
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
        k.ln() - k * s.ln() + (k - 1.0) * y.ln() - (y / s).powf(k)
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0] * Self::gamma_fn(1.0 + 1.0 / f[1])
    }

    fn variance(&self, f: &[f64]) -> f64 {
        let (s, k) = (f[0], f[1]);
        let g1 = Self::gamma_fn(1.0 + 1.0 / k);
        s * s * (Self::gamma_fn(1.0 + 2.0 / k) - g1 * g1)
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (s, k) = (f[0], f[1]);
        let t = (y / s).powf(k);
        out[0] = (k / s) * (t - 1.0);
        out[1] = 1.0 / k + (y / s).ln() * (1.0 - t);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let (s, k) = (f[0], f[1]);
        let i_kk = ((1.0 - EULER_GAMMA) * (1.0 - EULER_GAMMA)
            + std::f64::consts::PI * std::f64::consts::PI / 6.0)
            / (k * k);
        DMatrix::from_row_slice(
            2,
            2,
            &[k * k / (s * s), (EULER_GAMMA - 1.0) / s, (EULER_GAMMA - 1.0) / s, i_kk],
        )
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        rand_distr::Weibull::new(f[0], f[1]).expect("positive parameters").sample(rng)
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = (y.iter().sum::<f64>() / n).max(1e-6);
        let var = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(1e-12);
        // Invert the coefficient of variation: cv^2(k) is decreasing in k.
        let target = var / (mean * mean);
        let cv2 = |k: f64| {
            let g1 = Self::gamma_fn(1.0 + 1.0 / k);
            Self::gamma_fn(1.0 + 2.0 / k) / (g1 * g1) - 1.0
        };
        let (mut lo, mut hi) = (0.05, 500.0);
        let shape = if target >= cv2(lo) {
            lo
        } else if target <= cv2(hi) {
            hi
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cv2(mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let scale = (mean / Self::gamma_fn(1.0 + 1.0 / shape)).max(1e-6);
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
        Arc::new(Weibull::new())
    }

    #[test]
    fn logpdf_reference() {
        let table = [(1.2, 1.5, 2.0, -0.5754614788624288), (0.3, 0.8, 0.7, -0.3425767724814457)];
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
        assert_relative_eq!(i[(0, 0)], 1.7777777777777777, max_relative = 1e-12);
        assert_relative_eq!(i[(0, 1)], -0.2818562233989781, max_relative = 1e-10);
        assert_relative_eq!(i[(1, 1)], 0.4559201652132198, max_relative = 1e-10);
    }

    #[test]
    fn start_recovers_shape() {
        let d = dist();
        let draws =
            distribution::random(&d, &NaturalParams(vec![2.0, 1.5]), 300_000, 29).unwrap();
        let opts: Vec<Option<f64>> = draws.iter().map(|&v| Some(v)).collect();
        let s = distribution::start_values(&d, &opts).unwrap();
        assert_relative_eq!(s.0[0], 2.0, max_relative = 0.05);
        assert_relative_eq!(s.0[1], 1.5, max_relative = 0.05);
    }
}
