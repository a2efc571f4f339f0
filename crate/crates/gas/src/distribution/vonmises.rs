//! Von Mises distribution, mean-direction/concentration parametrization.
//! The reported variance is the circular variance 1 - I1(nu)/I0(nu).

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::error::Result;
use crate::special::{bessel_i1_over_i0, ln_bessel_i};

use super::{DataType, DistributionDescriptor, ScoreDistribution, Support};

const LN_2PI: f64 = 1.8378770664093453;

pub struct VonMises {
    desc: DistributionDescriptor,
}

impl VonMises {
    pub fn new() -> Self {
        VonMises {
            desc: DistributionDescriptor::new(
                "vonmises",
                "von Mises",
                "meanconc",
                "Mean-Concentration",
                DataType::Circular,
                &["mean", "concentration"],
                &[Support::Circular, Support::Positive],
                true,
            ),
        }
    }
}

fn wrap_angle(theta: f64) -> f64 {
    theta.sin().atan2(theta.cos())
}

impl ScoreDistribution for VonMises {
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
        let (mu, nu) = (f[0], f[1]);
        nu * (y - mu).cos() - LN_2PI - ln_bessel_i(0, nu)
    }

    fn mean(&self, f: &[f64]) -> f64 {
        f[0]
    }

    fn variance(&self, f: &[f64]) -> f64 {
        1.0 - bessel_i1_over_i0(f[1])
    }

    fn score(&self, y: f64, f: &[f64], out: &mut [f64]) {
        let (mu, nu) = (f[0], f[1]);
        out[0] = nu * (y - mu).sin();
        out[1] = (y - mu).cos() - bessel_i1_over_i0(nu);
    }

    fn fisher(&self, f: &[f64]) -> DMatrix<f64> {
        let nu = f[1];
        let a = bessel_i1_over_i0(nu);
        DMatrix::from_row_slice(2, 2, &[nu * a, 0.0, 0.0, 1.0 - a / nu - a * a])
    }

    fn sample(&self, f: &[f64], rng: &mut dyn RngCore) -> f64 {
        // Best & Fisher (1979) wrapped-Cauchy rejection sampler.
        let (mu, kappa) = (f[0], f[1]);
        let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
        let r = (1.0 + rho * rho) / (2.0 * rho);
        loop {
            let u1: f64 = rng.gen();
            let z = (std::f64::consts::PI * u1).cos();
            let fz = (1.0 + r * z) / (r + z);
            let c = kappa * (r - fz);
            let u2: f64 = rng.gen();
            if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                let u3: f64 = rng.gen();
                let theta = mu + (u3 - 0.5).signum() * fz.acos();
                return wrap_angle(theta);
            }
        }
    }

    fn start(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len() as f64;
        let s: f64 = y.iter().map(|v| v.sin()).sum::<f64>() / n;
        let c: f64 = y.iter().map(|v| v.cos()).sum::<f64>() / n;
        let mu = s.atan2(c);
        let rbar = (s * s + c * c).sqrt().min(1.0 - 1e-9);
        // Standard approximation to the inverse of A(nu) = I1/I0.
        let nu = if rbar < 0.53 {
            2.0 * rbar + rbar.powi(3) + 5.0 * rbar.powi(5) / 6.0
        } else if rbar < 0.85 {
            -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar)
        } else {
            1.0 / (rbar.powi(3) - 4.0 * rbar * rbar + 3.0 * rbar)
        };
        vec![mu, nu.max(1e-6)]
    }
}
