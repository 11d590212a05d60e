//! Randomized invariants: scale invariance of the record reduction,
//! estimator range and optimality properties, interval identities, and
//! distribution-law sanity checks.

mod common;

use common::reduced_log_likelihood;
use geomrec::dist::{direct_generate_sample, TruncatedGeometric};
use geomrec::estimators::{
    confidence_interval, hill_from_sample, mle_complete, mle_practical, Variant,
};
use geomrec::finance::standardize;
use geomrec::montecarlo::replication_rng;
use geomrec::records::{Extractor, GeomRecordParams, PushEvent};
use proptest::prelude::*;

fn observations() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..100.0, 1..60)
}

fn push_all(extractor: &mut Extractor, values: &[f64]) {
    for &x in values {
        extractor.push(x).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    // The reduced statistics depend only on ratios, so rescaling every
    // observation together with the activation level changes nothing.
    #[test]
    fn reduction_is_scale_invariant(
        values in observations(),
        delta in 0.15f64..0.85,
        m in 2u32..9,
        scale in prop::sample::select(vec![0.03f64, 0.7, 3.0, 250.0]),
    ) {
        let params = GeomRecordParams::new(delta, m, 0.0).unwrap();
        let mut base = Extractor::new(params);
        push_all(&mut base, &values);

        let scaled_values: Vec<f64> = values.iter().map(|x| x * scale).collect();
        let mut scaled = Extractor::new(params);
        push_all(&mut scaled, &scaled_values);

        let a = base.finalize().unwrap();
        let b = scaled.finalize().unwrap();
        prop_assert_eq!(a.n_blocks(), b.n_blocks());
        for (ba, bb) in a.blocks().iter().zip(b.blocks()) {
            prop_assert_eq!(ba.k_index, bb.k_index);
            prop_assert_eq!(&ba.v_indices, &bb.v_indices);
        }
    }

    // The closed-form success probability always lands strictly inside the
    // unit interval, so the tail-index estimate is positive and finite.
    #[test]
    fn complete_estimate_is_positive_finite(
        seed in 0u64..10_000,
        gamma in 0.3f64..6.0,
        delta in 0.15f64..0.85,
        m in 2u32..9,
        n in 1usize..30,
    ) {
        let mut rng = replication_rng(404, seed);
        let params = GeomRecordParams::new(delta, m, 0.0).unwrap();
        let sample = direct_generate_sample(gamma, params, n, &mut rng).unwrap();
        let report = mle_complete(&sample).unwrap();
        prop_assert!(report.gamma_hat.is_finite());
        prop_assert!(report.gamma_hat > 0.0);
        prop_assert!(report.sigma_hat > 0.0);
        prop_assert_eq!(report.n_blocks, n);
        prop_assert_eq!(report.variant, Variant::Complete);
    }

    // The closed form maximizes the reduced likelihood: nudging the estimate
    // either way can only lower it.
    #[test]
    fn complete_estimate_beats_nearby_values(
        seed in 0u64..10_000,
        gamma in 0.5f64..5.0,
        delta in 0.2f64..0.8,
        m in 2u32..9,
        n in 1usize..30,
    ) {
        let mut rng = replication_rng(405, seed);
        let params = GeomRecordParams::new(delta, m, 0.0).unwrap();
        let sample = direct_generate_sample(gamma, params, n, &mut rng).unwrap();
        let report = mle_complete(&sample).unwrap();
        let stats = sample.complete_stats();
        // Reduced likelihood exponents: each block contributes m to the
        // beta power through its near-record count law and one factor of
        // (1 - beta) through its closing jump.
        let c = f64::from(m) * stats.n as f64 + (stats.sum_v + stats.sum_k) as f64;
        let d = stats.n as f64 + stats.sum_s as f64;

        let at = |g: f64| reduced_log_likelihood(g, delta, m, c, d);
        let here = at(report.gamma_hat);
        prop_assert!(here >= at(report.gamma_hat * (1.0 + 1e-3)) - 1e-12);
        prop_assert!(here >= at(report.gamma_hat * (1.0 - 1e-3)) - 1e-12);
    }

    // With at least two observed blocks the all-data variant always exists.
    #[test]
    fn practical_estimate_exists_beyond_one_block(
        seed in 0u64..10_000,
        gamma in 0.5f64..5.0,
        delta in 0.2f64..0.8,
        m in 2u32..9,
        n in 2usize..30,
    ) {
        let mut rng = replication_rng(406, seed);
        let params = GeomRecordParams::new(delta, m, 0.0).unwrap();
        let sample = direct_generate_sample(gamma, params, n, &mut rng).unwrap();
        let report = mle_practical(&sample).unwrap();
        prop_assert!(report.gamma_hat.is_finite() && report.gamma_hat > 0.0);
        prop_assert_eq!(report.variant, Variant::Practical);
    }

    // Interval width identity and its monotonicity in both sample size and
    // confidence level.
    #[test]
    fn interval_width_behaves(
        gamma_hat in 0.2f64..6.0,
        sigma in 0.05f64..4.0,
        n in 1usize..400,
        alpha in 0.002f64..0.5,
    ) {
        let (lo, hi) = confidence_interval(gamma_hat, sigma, n, alpha).unwrap();
        prop_assert!((0.5 * (lo + hi) - gamma_hat).abs() < 1e-9);

        let z = geomrec::estimators::normal_quantile(1.0 - alpha / 2.0).unwrap();
        let want = 2.0 * z * sigma / (n as f64).sqrt();
        prop_assert!(((hi - lo) - want).abs() < 1e-9 * want.max(1.0));

        let (lo2, hi2) = confidence_interval(gamma_hat, sigma, n * 4, alpha).unwrap();
        prop_assert!(hi2 - lo2 < hi - lo);

        let (lo3, hi3) = confidence_interval(gamma_hat, sigma, n, (alpha * 1.5).min(0.999)).unwrap();
        prop_assert!(hi3 - lo3 <= hi - lo + 1e-12);
    }

    // The top-order-statistics estimator ignores everything below the
    // reference order statistic.
    #[test]
    fn hill_ignores_values_below_reference(
        top in prop::collection::vec(1.0f64..1e6, 6..40),
        junk in prop::collection::vec(0.0001f64..1.0, 0..40),
        k in 2usize..5,
    ) {
        let mut sorted = top.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let reference = sorted[k];
        // Keep the junk strictly below the reference statistic.
        let mut merged = top.clone();
        merged.extend(junk.iter().map(|j| j * reference * 0.999_999));

        let lhs = hill_from_sample(&top, k);
        let rhs = hill_from_sample(&merged, k);
        match (lhs, rhs) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side failed: {a:?} vs {b:?}"),
        }
    }

    // Standardizing twice is the same as standardizing once.
    #[test]
    fn standardization_is_idempotent(
        values in prop::collection::vec(-50.0f64..50.0, 3..200),
    ) {
        prop_assume!(values.iter().any(|v| (v - values[0]).abs() > 1e-6));
        let once = standardize(&values).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    // The truncated geometric mass function is a genuine distribution.
    #[test]
    fn truncated_geometric_mass_sums_to_one(
        p in 0.01f64..0.99,
        top in 0u32..60,
    ) {
        let tg = TruncatedGeometric::new(p, top).unwrap();
        let total: f64 = (0..=top).map(|j| tg.pmf(j)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let (mean, _) = tg.moments();
        prop_assert!(mean >= -1e-12 && mean <= f64::from(top) + 1e-12);
    }

    // Record events never fire on values at or below the activation level,
    // and the raw count tallies exactly the post-activation stream.
    #[test]
    fn activation_gate_counts_correctly(
        values in prop::collection::vec(0.5f64..20.0, 1..80),
        threshold in 1.0f64..10.0,
    ) {
        let params = GeomRecordParams::new(0.5, 4, threshold).unwrap();
        let mut extractor = Extractor::new(params);
        let mut expected_raw = 0u64;
        let mut activated = false;
        for &x in &values {
            let event = extractor.push(x).unwrap();
            if activated || x > threshold {
                expected_raw += 1;
                activated = true;
                prop_assert!(!matches!(event, PushEvent::Ignored));
            } else {
                prop_assert!(matches!(event, PushEvent::Ignored));
            }
        }
        if activated {
            let sample = extractor.finalize().unwrap();
            prop_assert_eq!(sample.raw_count(), expected_raw);
        } else {
            prop_assert!(extractor.finalize().is_err());
        }
    }
}
