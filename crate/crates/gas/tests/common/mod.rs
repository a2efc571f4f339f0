//! Shared helpers for the integration suites: random in-support
//! parameter points and independent finite-difference score oracles.

#![allow(dead_code)]

use gas::distribution::{self, Dist, NaturalParams, Support};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random natural parameter point comfortably inside the support, so
/// finite-difference steps of 1e-6 stay in-support.
pub fn random_params(d: &Dist, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let desc = d.descriptor();
    match desc.label.as_str() {
        "skellam" => {
            let m: f64 = rng.gen_range(-2.0..2.0);
            let v = m.abs() + rng.gen_range(0.5..4.0);
            vec![m, v]
        }
        "t" => vec![
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.3..3.0),
            rng.gen_range(2.6..20.0),
        ],
        _ => desc
            .param_supports
            .iter()
            .map(|s| match s {
                Support::Real => rng.gen_range(-2.0..2.0),
                Support::Positive => rng.gen_range(0.3..4.0),
                Support::UnitInterval => rng.gen_range(0.05..0.95),
                Support::Circular => rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            })
            .collect(),
    }
}

/// A valid random observation: one draw from the distribution itself.
pub fn random_observation(d: &Dist, f: &[f64], seed: u64) -> f64 {
    distribution::random(d, &NaturalParams(f.to_vec()), 1, seed).unwrap()[0]
}

/// Central finite difference of the log-likelihood with step 1e-6, in
/// natural space (mask all false) or link space (perturbing the linked
/// coordinate). Independent of the analytic score path.
pub fn fd_score(d: &Dist, y: f64, f: &[f64], linked: &[bool]) -> Vec<f64> {
    let desc = d.descriptor();
    let h = 1e-6;
    (0..f.len())
        .map(|i| {
            let (up, down) = if linked[i] {
                let q = distribution::link_apply_component(desc.param_supports[i], f[i]);
                let mut fp = f.to_vec();
                let mut fm = f.to_vec();
                fp[i] = inverse_component(desc.param_supports[i], q + h);
                fm[i] = inverse_component(desc.param_supports[i], q - h);
                (fp, fm)
            } else {
                let mut fp = f.to_vec();
                let mut fm = f.to_vec();
                fp[i] += h;
                fm[i] -= h;
                (fp, fm)
            };
            let lp = distribution::loglik(d, y, &NaturalParams(up)).unwrap();
            let lm = distribution::loglik(d, y, &NaturalParams(down)).unwrap();
            (lp - lm) / (2.0 * h)
        })
        .collect()
}

fn inverse_component(support: Support, q: f64) -> f64 {
    match support {
        Support::Positive => q.exp(),
        Support::UnitInterval => 1.0 / (1.0 + (-q).exp()),
        _ => q,
    }
}

/// |a - b| <= max(abs_tol, rel_tol * max(|a|, |b|)).
pub fn close(a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> bool {
    (a - b).abs() <= abs_tol.max(rel_tol * a.abs().max(b.abs()))
}
