use std::f64::consts::PI;

use cotlab::contfrac::{cf_expand, gauss_map, gauss_measure, growth_fit, BigUint, CFExpansion, RealInput};
use cotlab::distribution::{from_sample_set, ks_distance};
use cotlab::gseries::{GEvaluator, GMethod, DEFAULT_TOLERANCE};
use cotlab::moments::{abs_moment_from_samples, hk_from_samples, GSampleSet, Normalization};
use cotlab::rng::uniform_points;
use cotlab::tolerances::G_SPREAD_FRACTION;
use proptest::prelude::*;

fn small_cfg() -> GEvaluator {
    GEvaluator::new(GMethod::Fourier, 20_000, 20_000).unwrap()
}

#[test]
fn law_is_symmetric() {
    // g(1 - a) = -g(a), so the sample law and its mirror image agree
    let law = from_sample_set(&GSampleSet::draw(100_000, 3, &small_cfg()).unwrap()).cdf;
    assert!(ks_distance(&law, &law.negated()) < 0.01);
    assert!((law.cdf_mid(0.0) - 0.5).abs() < 0.01);
}

#[test]
fn median_of_f_at_zero_over_seeds() {
    let cfg = small_cfg();
    let mut devs: Vec<f64> = (0..5)
        .map(|seed| (from_sample_set(&GSampleSet::draw(20_000, seed, &cfg).unwrap()).cdf.cdf_mid(0.0) - 0.5).abs())
        .collect();
    devs.sort_by(f64::total_cmp);
    assert!(devs[2] <= 0.01, "{devs:?}");
}

#[test]
fn absolute_moments_obey_jensen() {
    let set = GSampleSet::draw(50_000, 11, &small_cfg()).unwrap();
    let norms: Vec<f64> =
        (1..=8).map(|l| abs_moment_from_samples(&set, l).unwrap().value.powf(1.0 / l as f64)).collect();
    assert!(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), "{norms:?}");
}

#[test]
fn normalizations_differ_by_powers_of_four() {
    let set = GSampleSet::draw(20_000, 5, &small_cfg()).unwrap();
    for k in 1..=4 {
        let pi = hk_from_samples(&set, k, Normalization::Pi).unwrap().value;
        let two_pi = hk_from_samples(&set, k, Normalization::TwoPi).unwrap().value;
        let ratio = pi / two_pi;
        assert!((ratio / 4f64.powi(k as i32) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn default_estimator_resolves_most_points() {
    let cfg = GEvaluator::new(GMethod::Fourier, 1_000_000, 1_000_000).unwrap();
    let pts = uniform_points(20_000, 8, 0, 1.0);
    let vals = cfg.eval_batch(&pts);
    let good = vals.iter().filter(|v| v.spread < DEFAULT_TOLERANCE).count() as f64 / vals.len() as f64;
    assert!(good >= G_SPREAD_FRACTION, "{good}");
    let mean_sq = vals.iter().map(|v| v.value * v.value).sum::<f64>() / vals.len() as f64;
    assert!((mean_sq - 5.0 * PI * PI / 36.0).abs() < 0.1, "{mean_sq}");
}

#[test]
fn gauss_map_pushes_forward_the_gauss_measure() {
    // the histogram of T(x) under x ~ Gauss matches the Gauss measure of each bin
    let u = uniform_points(200_000, 21, 0, 1.0);
    let bins = 10;
    let mut counts = vec![0usize; bins];
    for &v in &u {
        let x = 2f64.powf(v) - 1.0;
        let t = gauss_map(x).unwrap();
        counts[((t * bins as f64) as usize).min(bins - 1)] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = gauss_measure(i as f64 / bins as f64, (i + 1) as f64 / bins as f64).unwrap();
        let est = c as f64 / u.len() as f64;
        let se = (p * (1.0 - p) / u.len() as f64).sqrt();
        assert!((est - p).abs() < 4.0 * se, "bin {i}: {est} vs {p}");
    }
}

proptest! {
    #[test]
    fn denominators_grow_exponentially(digits in prop::collection::vec(1u32..50, 2..40)) {
        let cf = CFExpansion::from_partial_quotients(digits.into_iter().map(BigUint::from).collect(), false);
        prop_assert!(growth_fit(&cf).unwrap() > 1.0);
    }

    #[test]
    fn rational_expansions_terminate_exactly(p in 1u64..1_000_000, extra in 1u64..1_000_000) {
        let q = p + extra;
        let cf = cf_expand(&RealInput::rational(p, q).unwrap(), usize::MAX, None).unwrap();
        prop_assert!(cf.terminated());
        prop_assert!(cf.recursion_holds() && cf.determinant_holds() && cf.convergents_reduced());
    }
}
