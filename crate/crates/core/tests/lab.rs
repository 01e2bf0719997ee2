use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use infree_core::genus::{goe_moment_poly, wishart_moment_poly, Caps};
use infree_core::lab::{
    exact_goe_word_expectation, goe_power_estimate, goe_trace_classes, goe_word_estimate, infinitesimal_estimator,
    monte_carlo, normalized_power_trace, sample_goe, stream_rng, wishart_power_estimate, ExactMatrix, McEstimate,
    MultiTrace, Sampler,
};
use infree_core::nc::{enumerate_nc2delta, enumerate_nc_pairings, k_delta, kreweras_perm, KDeltaComplement};
use infree_core::perm::SignPattern;
use infree_core::scalar::{int, Rational};
use infree_core::word::Word;

fn random_integer_matrices(count: usize, size: usize, seed: u64) -> Vec<ExactMatrix> {
    let mut rng = stream_rng(seed, 0);
    (0..count).map(|_| DMatrix::from_fn(size, size, |_, _| int(rng.random_range(-3..=3)))).collect()
}

fn tr(data: &KDeltaComplement, mats: &[ExactMatrix]) -> Rational {
    MultiTrace::from_complement(data, true).evaluate(mats).unwrap()
}

#[test]
fn leading_orders_are_the_planar_and_annular_sums() {
    let caps = Caps::default();
    for n in [2usize, 4, 6] {
        for (size, seed) in [(3usize, 7u64), (5, 8)] {
            let mats = random_integer_matrices(n, size, seed + n as u64);
            let mut by_cycles: BTreeMap<usize, Rational> = BTreeMap::new();
            for data in goe_trace_classes(n, &caps).unwrap() {
                *by_cycles.entry(data.sigma.cycle_count()).or_insert_with(Rational::zero) += tr(&data, &mats);
            }
            assert!(by_cycles.keys().all(|&k| k <= n / 2 + 1), "n={n}");
            let planar: Rational = enumerate_nc_pairings(n)
                .iter()
                .map(|pi| {
                    let sigma = kreweras_perm(&pi.to_permutation());
                    tr(&KDeltaComplement { sigma, eta: SignPattern::all_positive(n) }, &mats)
                })
                .sum();
            let annular: Rational = enumerate_nc2delta(n).iter().map(|rho| tr(&k_delta(rho), &mats)).sum();
            assert_eq!(by_cycles[&(n / 2 + 1)], planar, "order 0, n={n}, size={size}");
            assert_eq!(by_cycles[&(n / 2)], annular, "order 1, n={n}, size={size}");
        }
    }
}

#[test]
fn exact_word_expectation_matches_sampling() {
    let mats = random_integer_matrices(4, 30, 11);
    let exact = exact_goe_word_expectation(&mats, &Caps::default()).unwrap().to_f64().unwrap();
    let float: Vec<DMatrix<f64>> = mats.iter().map(|m| m.map(|v| v.to_f64().unwrap())).collect();
    let est = goe_word_estimate(&float, 100_000, 5).unwrap();
    assert!(est.within(exact, 4.0), "{est:?} vs {exact}");
}

fn indistinguishable(a: &McEstimate, b: &McEstimate, k: f64) -> bool {
    (a.mean - b.mean).abs() <= k * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

#[test]
fn normalized_sum_of_goes_is_goe() {
    let (n, samples) = (12, 40_000);
    for k in 2..=6 {
        let direct = goe_power_estimate(n, k, samples, 100).unwrap();
        let averaged = monte_carlo(samples, 200, |rng| {
            let x = sample_goe(n, rng);
            let y = sample_goe(n, rng);
            normalized_power_trace(&((x + y) / 2f64.sqrt()), k)
        })
        .unwrap();
        assert!(indistinguishable(&direct, &averaged, 3.0), "k={k}: {direct:?} vs {averaged:?}");
    }
    let exact = goe_moment_poly(6, &Caps::default()).unwrap().eval(&0.0, &(n as f64)).unwrap();
    assert!(goe_power_estimate(n, 6, samples, 100).unwrap().within(exact, 3.0));
}

#[test]
fn wishart_sampling_matches_genus_expansion() {
    let (m, n) = (6usize, 4usize);
    for k in 1..=4 {
        let poly = wishart_moment_poly(&Word::power(0, k), &Caps::default()).unwrap();
        let exact = poly.eval(&(m as f64), &(n as f64)).unwrap();
        let est = wishart_power_estimate(m, n, k, 50_000, 31 + k as u64).unwrap();
        assert!(est.within(exact, 3.0), "k={k}: {est:?} vs {exact}");
    }
    let square = wishart_power_estimate(40, 40, 1, 20_000, 3).unwrap();
    assert!(square.within(1.0, 3.0));
}

#[test]
fn infinitesimal_estimates() {
    let goe = infinitesimal_estimator(Sampler::Goe, 4, &[20, 40], 200_000, 17, Some(2.0)).unwrap();
    assert!((goe.m_prime - 5.0).abs() <= 3.0 * goe.m_prime_std_error, "{goe:?}");
    // M = 2N + 3 with limit m = c + c² = 6 and m′ = c′(1 + 2c) = 15.
    let wishart = Sampler::Wishart { c: 2, c_prime: 3 };
    let w = infinitesimal_estimator(wishart, 2, &[20, 40], 40_000, 19, Some(6.0)).unwrap();
    assert!((w.m_prime - 15.0).abs() <= 3.0 * w.m_prime_std_error, "{w:?}");
    // Without the limit the two-point fit keeps the N⁻² term, so compare with
    // the same fit applied to the exact expectations.
    let poly = wishart_moment_poly(&Word::power(0, 2), &Caps::default()).unwrap();
    let exact = |n: f64| poly.eval(&(2.0 * n + 3.0), &n).unwrap();
    let slope = (exact(20.0) - exact(40.0)) / (1.0 / 20.0 - 1.0 / 40.0);
    let intercept = exact(40.0) - slope / 40.0;
    let fitted = infinitesimal_estimator(wishart, 2, &[20, 40], 40_000, 19, None).unwrap();
    assert!((fitted.m - intercept).abs() <= 3.0 * fitted.m_std_error, "{fitted:?} vs {intercept}");
    assert!((fitted.m_prime - slope).abs() <= 3.0 * fitted.m_prime_std_error, "{fitted:?} vs {slope}");
    assert!(infinitesimal_estimator(Sampler::Goe, 4, &[20, 40], 0, 1, None).is_err());
    assert!(infinitesimal_estimator(Sampler::Goe, 4, &[20], 100, 1, None).is_err());
}
