//! Negative binomial distribution, NB2 parametrization:
//! mean mu and dispersion alpha with Var = mu + alpha * mu^2.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::Result;
use crate::special::{digamma, ln_gamma};

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct NegBin {
    desc: DistributionDescriptor,
}

impl NegBin {
    pub fn new() -> Self {
        NegBin {
            desc: DistributionDescriptor::new(
                "negbin",
                "Negative Binomial",
                "nb2",
                "NB2",
                DataType::Count,
                &["mean", "dispersion"],
                &[Support::Positive, Support::Positive],
                // E[d2 l / d mu d alpha] = 0 in the NB2 parametrization.
                true,
            ),
        }
    }

    fn score_dispersion(y: f64, mu: f64, alpha: f64) -> f64 {
        let r = 1.0 / alpha;
        (digamma(r) - digamma(y + r) + (alpha * mu).ln_1p()) / (alpha * alpha)
            + (y - mu) / (alpha * (1.0 + alpha * mu))
    }
}

impl ScoreDistribution for NegBin {
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
        let (mu, alpha) = (f[0], f[1]);
        let r = 1.0 / alpha;
        ln_gamma(y + r) - ln_gamma(r) - ln_gamma(y + 1.0) + y * (alpha * mu).ln()
            - (y + r) * (alpha * mu).ln_1p()
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[0] + f[1] * f[0] * f[0]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu, alpha) = (f[0], f[1]);
        out[0] = (y - mu) / (mu * (1.0 + alpha * mu));
        out[1] = Self::score_dispersion(y, mu, alpha);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let (mu, alpha) = (f[0], f[1]);
        // Mean block in closed form; the dispersion block has no closed
        // form and is summed over the mass function until the tail is
        // negligible. The cross term is exactly zero.
        let var = mu + alpha * mu * mu;
        let cap = (mu + 100.0 * var.sqrt() + 1000.0).ceil() as usize;
        let mut i_aa = 0.0;
        let mut mass = 0.0;
        for y in 0..=cap {
            let yf = y as f64;
            let p = self.loglik(yf, f).exp();
            mass += p;
            let s = Self::score_dispersion(yf, mu, alpha);
            i_aa += p * s * s;
            if 1.0 - mass < 1e-14 && yf > mu {
                break;
            }
        }
        DMatrix::from_row_slice(2, 2, &[1.0 / (mu * (1.0 + alpha * mu)), 0.0, 0.0, i_aa])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let (mu, alpha) = (f[0], f[1]);
        // Gamma-Poisson mixture: G ~ Gamma(1/alpha, alpha*mu), y ~ Pois(G).
        let g = rand_distr::Gamma::new(1.0 / alpha, alpha * mu)
            .expect("positive gamma parameters")
            .sample(rng);
        if g <= 0.0 {
            return 0.0;
        }
        rand_distr::Poisson::new(g).expect("positive rate").sample(rng)
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let mu = mean.max(1e-6);
        let alpha = ((var - mu) / (mu * mu)).max(1e-6);
        vec![mu, alpha]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(NegBin::new())
    }

    #[test]
    fn logpmf_reference() {
        // scipy.stats.nbinom.logpmf, frozen.
        let table = [
            (4.0, 2.0, 0.5, -2.549445170925572),
            (0.0, 1.0, 0.2, -0.9116077839697729),
            (7.0, 3.5, 1.1, -3.2940541475625293),
        ];
        for (y, mu, a, expected) in table {
            let ll = distribution::loglik(&dist(), y, &NaturalParams(vec![mu, a])).unwrap();
            assert_relative_eq!(ll, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn nb2_variance() {
        let v = distribution::dist_variance(&dist(), &NaturalParams(vec![2.0, 0.5])).unwrap();
        assert_relative_eq!(v, 4.0);
    }

    #[test]
    fn mean_score_linked_is_residual_scaled() {
        // d loglik / d log(mu) = mu * (y-mu)/(mu(1+alpha mu)) = (y-mu)/(1+alpha mu)
        let s =
            distribution::score(&dist(), 4.0, &NaturalParams(vec![2.0, 0.5]), &[true, false])
                .unwrap();
        assert_relative_eq!(s[0], 2.0 / 2.0, max_relative = 1e-12);
        assert_relative_eq!(s[1], -0.3607446110935517, max_relative = 1e-9);
    }

    #[test]
    fn fisher_mean_block_closed_form() {
        let i = distribution::fisher(&dist(), &NaturalParams(vec![2.0, 0.5]), &[false, false])
            .unwrap();
        assert_relative_eq!(i[(0, 0)], 0.25, max_relative = 1e-12);
        assert_eq!(i[(0, 1)], 0.0);
        // Reference value from summing the pmf independently (scipy).
        assert_relative_eq!(i[(1, 1)], 0.406203312, max_relative = 1e-6);
    }

    #[test]
    fn moments_by_monte_carlo() {
        let d = dist();
        let n = 1_000_000;
        let draws = distribution::random(&d, &NaturalParams(vec![2.0, 0.5]), n, 3).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 4.0 * (4.0_f64 / n as f64).sqrt());
        let m4 = draws.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((m4 - var * var) / n as f64).sqrt();
        assert!((var - 4.0).abs() < 4.0 * se_var);
    }
}
