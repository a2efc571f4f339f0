//! Module-level property suites for the distribution layer: sampler
//! moments, Fisher shape, orthogonality flags, and link round trips.

mod common;

use common::{close, random_params};
use gas::distribution::{
    self, dist_mean, dist_variance, fisher, link_apply, link_inverse, list_distributions,
    registry, random, DataType, NaturalParams,
};
use gas::linalg;
use gas::rng::rng_from_seed;
use proptest::prelude::*;

fn all_dists() -> Vec<gas::distribution::Dist> {
    list_distributions(None, None)
        .into_iter()
        .map(|d| registry().resolve(&d.label, Some(&d.parametrization)).unwrap())
        .collect()
}

#[test]
fn sampler_moments_match_mean_and_variance() {
    let n = 1_000_000;
    let mut rng = rng_from_seed(2024);
    for d in all_dists() {
        let f = NaturalParams(random_params(&d, &mut rng));
        let draws = random(&d, &f, n, 77).unwrap();
        let label = &d.descriptor().label;

        if d.descriptor().data_type == DataType::Circular {
            // Circular mean direction and circular variance.
            let s: f64 = draws.iter().map(|v| v.sin()).sum::<f64>() / n as f64;
            let c: f64 = draws.iter().map(|v| v.cos()).sum::<f64>() / n as f64;
            let mu_hat = s.atan2(c);
            let mu = dist_mean(&d, &f).unwrap();
            let diff = (mu_hat - mu).sin().atan2((mu_hat - mu).cos()).abs();
            assert!(diff < 0.02, "{label}: circular mean off by {diff}");
            let circ_var_hat = 1.0 - (s * s + c * c).sqrt();
            let circ_var = dist_variance(&d, &f).unwrap();
            assert!(
                (circ_var_hat - circ_var).abs() < 0.01,
                "{label}: circular variance {circ_var_hat} vs {circ_var}"
            );
            continue;
        }

        let mean = dist_mean(&d, &f).unwrap();
        let var = dist_variance(&d, &f).unwrap();
        let m_hat: f64 = draws.iter().sum::<f64>() / n as f64;
        let se_mean = (var / n as f64).sqrt();
        assert!(
            (m_hat - mean).abs() < 4.0 * se_mean,
            "{label}: sample mean {m_hat} vs {mean} (se {se_mean})"
        );

        let v_hat: f64 = draws.iter().map(|v| (v - m_hat) * (v - m_hat)).sum::<f64>() / n as f64;
        let m4: f64 = draws.iter().map(|v| (v - m_hat).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((m4 - v_hat * v_hat).max(0.0) / n as f64).sqrt();
        assert!(
            (v_hat - var).abs() < 4.0 * se_var,
            "{label}: sample variance {v_hat} vs {var} (se {se_var})"
        );
    }
}

#[test]
fn fisher_is_symmetric_psd_everywhere() {
    let mut rng = rng_from_seed(5150);
    for d in all_dists() {
        let desc = d.descriptor().clone();
        for _ in 0..20 {
            let f = NaturalParams(random_params(&d, &mut rng));
            for mask in [vec![false; desc.param_count], desc.default_links.clone()] {
                let info = fisher(&d, &f, &mask).unwrap();
                assert!(
                    linalg::asymmetry(&info) <= 1e-12,
                    "{}: fisher asymmetry {}",
                    desc.label,
                    linalg::asymmetry(&info)
                );
                let eig = info.clone().symmetric_eigen();
                for &l in eig.eigenvalues.iter() {
                    assert!(l >= -1e-10, "{}: negative eigenvalue {l}", desc.label);
                }
            }
        }
    }
}

#[test]
fn orthogonal_flags_mean_diagonal_fisher() {
    let mut rng = rng_from_seed(99);
    for d in all_dists() {
        let desc = d.descriptor().clone();
        if !desc.orthogonal || desc.param_count == 1 {
            continue;
        }
        for _ in 0..20 {
            let f = NaturalParams(random_params(&d, &mut rng));
            let info = fisher(&d, &f, &vec![false; desc.param_count]).unwrap();
            for i in 0..desc.param_count {
                for j in 0..desc.param_count {
                    if i != j {
                        assert!(
                            info[(i, j)].abs() <= 1e-10,
                            "{}: off-diagonal {} at ({i},{j})",
                            desc.label,
                            info[(i, j)]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn score_is_zero_mean_in_sample() {
    // Light Monte-Carlo sanity check; the acceptance suite runs the full
    // 1e5-draw version against the Fisher matrix.
    let mut rng = rng_from_seed(31);
    for d in all_dists() {
        let desc = d.descriptor().clone();
        let f = NaturalParams(random_params(&d, &mut rng));
        let n = 20_000;
        let draws = random(&d, &f, n, 11).unwrap();
        let k = desc.param_count;
        let mut sums = vec![0.0; k];
        let mut sq = vec![0.0; k];
        for &y in &draws {
            let s = distribution::score(&d, y, &f, &vec![false; k]).unwrap();
            for i in 0..k {
                sums[i] += s[i];
                sq[i] += s[i] * s[i];
            }
        }
        for i in 0..k {
            let mean = sums[i] / n as f64;
            let var = sq[i] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(
                mean.abs() <= 4.0 * se + 1e-12,
                "{}: score component {i} mean {mean} (se {se})",
                desc.label
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn link_round_trip_positive(v in 1e-6_f64..1e6) {
        let d = registry().resolve("pois", None).unwrap();
        let q = link_apply(d.descriptor(), &NaturalParams(vec![v]), &[true]).unwrap();
        let back = link_inverse(d.descriptor(), &q, &[true]).unwrap();
        prop_assert!(close(back.0[0], v, 1e-12, 0.0));
    }

    #[test]
    fn link_round_trip_unit_interval(v in 1e-9_f64..1.0) {
        prop_assume!(v < 1.0 - 1e-9);
        let d = registry().resolve("bernoulli", None).unwrap();
        let q = link_apply(d.descriptor(), &NaturalParams(vec![v]), &[true]).unwrap();
        let back = link_inverse(d.descriptor(), &q, &[true]).unwrap();
        prop_assert!(close(back.0[0], v, 1e-12, 0.0));
    }
}

#[test]
fn start_values_are_in_support() {
    let mut rng = rng_from_seed(404);
    for d in all_dists() {
        let f = NaturalParams(random_params(&d, &mut rng));
        let draws = random(&d, &f, 500, 3).unwrap();
        let opts: Vec<Option<f64>> = draws.into_iter().map(Some).collect();
        let start = distribution::start_values(&d, &opts).unwrap();
        // In-support means downstream moment calls succeed.
        dist_mean(&d, &start).unwrap_or_else(|e| {
            panic!("{}: start out of support: {e}", d.descriptor().label)
        });
    }
}

#[test]
fn all_missing_start_errors() {
    let d = registry().resolve("pois", None).unwrap();
    assert!(distribution::start_values(&d, &[None, None]).is_err());
}
