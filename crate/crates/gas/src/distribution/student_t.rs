//! Student's t distribution, mean/variance parametrization with static
//! degrees of freedom. The variance parametrization requires df > 2; the
//! implied scale is sigma^2 = v * (df-2)/df.

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::Distribution as _;

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma, trigamma};

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

pub struct StudentT {
    desc: DistributionDescriptor,
}

impl StudentT {
    pub fn new() -> Self {
        StudentT {
            desc: DistributionDescriptor::new(
                "t",
                "Student's t",
                "meanvar",
                "Mean-Variance",
                DataType::Real,
                &["mean", "variance", "df"],
                &[Support::Real, Support::Positive, Support::Positive],
                false,
            ),
        }
    }
}

impl ScoreDistribution for StudentT {
    fn descriptor(&self) -> &DistributionDescriptor {
        &self.desc
    }

    fn check_params(&self, f: &[f64]) -> Result<()> {
        if f[2] <= 2.0 {
            return Err(Error::domain(format!(
                "t/meanvar requires df > 2 so the variance exists (got {})",
                f[2]
            )));
        }
        Ok(())
    }

    fn in_sample_space(&self, y: f64) -> bool {
        y.is_finite()
    }

    fn loglik(&self, y: f64, f: &[f64]) -> f64 {
        let (mu, v, nu) = (f[0], f[1], f[2]);
        let c = (y - mu) * (y - mu) / ((nu - 2.0) * v);
        ln_gamma((nu + 1.0) / 2.0)
            - ln_gamma(nu / 2.0)
            - 0.5 * (std::f64::consts::PI * (nu - 2.0) * v).ln()
            - 0.5 * (nu + 1.0) * c.ln_1p()
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        f[1]
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu, v, nu) = (f[0], f[1], f[2]);
        let r = y - mu;
        let denom = (nu - 2.0) * v + r * r;
        let c = r * r / ((nu - 2.0) * v);
        out[0] = (nu + 1.0) * r / denom;
        out[1] = -0.5 / v + 0.5 * (nu + 1.0) * r * r / (v * denom);
        out[2] = 0.5 * digamma((nu + 1.0) / 2.0) - 0.5 * digamma(nu / 2.0)
            - 0.5 / (nu - 2.0)
            - 0.5 * c.ln_1p()
            + 0.5 * (nu + 1.0) * c / ((nu - 2.0) * (1.0 + c));
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let (_, v, nu) = (f[0], f[1], f[2]);
        // Fisher information in the (mu, sigma^2, nu) parametrization,
        // transported to (mu, v, nu) through sigma^2 = v (nu-2)/nu.
        let s2 = v * (nu - 2.0) / nu;
        let i_mm = (nu + 1.0) / ((nu + 3.0) * s2);
        let i_ss = nu / (2.0 * s2 * s2 * (nu + 3.0));
        let i_sn = -1.0 / (s2 * (nu + 1.0) * (nu + 3.0));
        let i_nn = 0.25 * (trigamma(nu / 2.0) - trigamma((nu + 1.0) / 2.0))
            - (nu + 5.0) / (2.0 * nu * (nu + 1.0) * (nu + 3.0));
        let dv = (nu - 2.0) / nu;
        let dn = 2.0 * v / (nu * nu);
        DMatrix::from_row_slice(
            3,
            3,
            &[
                i_mm,
                0.0,
                0.0,
                0.0,
                dv * dv * i_ss,
                dv * (i_ss * dn + i_sn),
                0.0,
                dv * (i_ss * dn + i_sn),
                i_nn + 2.0 * dn * i_sn + dn * dn * i_ss,
            ],
        )
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        let (mu, v, nu) = (f[0], f[1], f[2]);
        let t: f64 = rand_distr::StudentT::new(nu).expect("positive df").sample(rng);
        mu + (v * (nu - 2.0) / nu).sqrt() * t
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(1e-6);
        let m4 = y.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let excess = m4 / (var * var) - 3.0;
        // Kurtosis of a t is 6/(df-4); invert and clamp inside (2, inf).
        let df = if excess > 0.01 { (4.0 + 6.0 / excess).clamp(2.5, 200.0) } else { 200.0 };
        vec![mean, var, df]
    }

    fn static_only(&self) -> &'static [usize] {
        &[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{self, Dist, NaturalParams};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn dist() -> Dist {
        Arc::new(StudentT::new())
    }

    #[test]
    fn logpdf_reference() {
        // scipy.stats.t.logpdf with scale sqrt(v(nu-2)/nu), frozen.
        let table = [
            (1.3, 0.5, 2.0, 5.0, -1.3638378502325639),
            (0.0, 0.0, 1.0, 3.0, -0.4515827052894549),
            (-2.0, 1.0, 0.7, 10.0, -5.924390224877011),
        ];
        for (y, mu, v, nu, expected) in table {
            let ll = distribution::loglik(&dist(), y, &NaturalParams(vec![mu, v, nu])).unwrap();
            assert_relative_eq!(ll, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn score_reference() {
        let s = distribution::score(
            &dist(),
            1.7,
            &NaturalParams(vec![0.5, 2.0, 5.0]),
            &[false, false, false],
        )
        .unwrap();
        assert_relative_eq!(s[0], 0.9677419354838709, max_relative = 1e-12);
        assert_relative_eq!(s[1], 0.04032258064516131, max_relative = 1e-10);
        assert_relative_eq!(s[2], 0.02913987784824676, max_relative = 1e-10);
    }

    #[test]
    fn fisher_reference() {
        // Verified against quadrature of the expected score outer product.
        let i = distribution::fisher(
            &dist(),
            &NaturalParams(vec![0.5, 2.0, 5.0]),
            &[false, false, false],
        )
        .unwrap();
        assert_relative_eq!(i[(0, 0)], 0.625, max_relative = 1e-12);
        assert_relative_eq!(i[(1, 1)], 0.078125, max_relative = 1e-12);
        assert_relative_eq!(i[(1, 2)], 0.010416666666666666, max_relative = 1e-10);
        assert_relative_eq!(i[(2, 2)], 0.00302258897966878, max_relative = 1e-8);
    }

    #[test]
    fn df_at_most_two_rejected() {
        assert!(distribution::dist_variance(&dist(), &NaturalParams(vec![0.0, 1.0, 2.0]))
            .is_err());
    }
}
