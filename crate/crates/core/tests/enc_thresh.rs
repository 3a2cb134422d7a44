mod common;

use std::sync::Arc;

use common::msg;
use ore_learn::enc_thresh::{
    draw_sample, empirical_error, exact_error, required_sample_size, Classifier, ComparatorLearner,
    DistributionKind, EncHypothesis, EncThreshConcept, Example, FiniteDistribution, LabeledExample,
    Learner, MemorizeOneLearner, UniformMessages, ZeroLearner,
};
use ore_learn::opf::OpfOre;
use ore_learn::ore::{Ciphertext, DeterministicOre, KeyMaterial, OreScheme};
use ore_learn::rng::derive_trial_rng;
use ore_learn::strengthen::escrow_ore;
use proptest::prelude::*;
use rand::Rng;

fn keys(ell: u8, coin: u8) -> Arc<KeyMaterial<OpfOre>> {
    Arc::new(KeyMaterial::generate(&OpfOre, 128, ell, [coin; 32]).unwrap())
}

fn example(km: &KeyMaterial<OpfOre>, v: u64) -> Example<OpfOre> {
    Example {
        params: Arc::new(km.params.clone()),
        c: OpfOre.enc_det(&km.sk, msg(v, km.ell())),
    }
}

fn labeled(km: &KeyMaterial<OpfOre>, v: u64, label: bool) -> LabeledExample<OpfOre> {
    LabeledExample {
        example: example(km, v),
        label,
    }
}

#[test]
fn concept_evaluation_examples() {
    let km = keys(8, 1);
    let f = EncThreshConcept::new(128, km.clone()).unwrap();
    assert!(f.evaluate(&OpfOre, &example(&km, 5)));
    assert!(f.evaluate(&OpfOre, &example(&km, 127)));
    assert!(!f.evaluate(&OpfOre, &example(&km, 128)));
    let other = keys(8, 2);
    assert!(!f.eval(&OpfOre, &other.params, &example(&km, 5).c));
    assert!(!f.eval(&OpfOre, &km.params, &Ciphertext::from_bytes(vec![0xa5; 40])));
    assert!(EncThreshConcept::new(257, km.clone()).is_err());
    let all = f.with_threshold(256).unwrap();
    assert!(all.evaluate(&OpfOre, &example(&km, 255)));
    let none = f.with_threshold(0).unwrap();
    assert!(!none.evaluate(&OpfOre, &example(&km, 0)));
}

#[test]
fn learner_examples() {
    let km = keys(8, 3);
    let mut rng = derive_trial_rng(1, 0);
    let zeros: Vec<_> = [1u64, 50, 200]
        .iter()
        .map(|&v| labeled(&km, v, false))
        .collect();
    assert!(ComparatorLearner
        .learn(&OpfOre, &zeros, &mut rng)
        .is_all_zeroes());
    assert!(ComparatorLearner
        .learn(&OpfOre, &[], &mut rng)
        .is_all_zeroes());

    let mixed: Vec<_> = [(3u64, true), (9, true), (6, true), (40, false)]
        .iter()
        .map(|&(v, l)| labeled(&km, v, l))
        .collect();
    let EncHypothesis::Comparator(h) = ComparatorLearner.learn(&OpfOre, &mixed, &mut rng) else {
        panic!("expected a comparator");
    };
    assert_eq!(OpfOre.dec(&km.sk, h.anchor()), Some(msg(9, 8)));
    assert_eq!(**h.params(), km.params);

    let single = vec![labeled(&km, 77, true)];
    let h = ComparatorLearner.learn(&OpfOre, &single, &mut rng);
    for v in 0..256 {
        assert_eq!(h.predict_example(&OpfOre, &example(&km, v)), v <= 77);
    }
    assert!(ZeroLearner.learn(&OpfOre, &mixed, &mut rng).is_all_zeroes());
    assert!(!MemorizeOneLearner
        .learn(&OpfOre, &mixed, &mut rng)
        .is_all_zeroes());
}

#[test]
fn positives_under_other_params_are_ignored_after_the_first() {
    let km = keys(8, 4);
    let other = keys(8, 5);
    let sample = vec![
        labeled(&km, 10, true),
        labeled(&other, 200, true),
        labeled(&km, 20, true),
    ];
    let EncHypothesis::Comparator(h) =
        ComparatorLearner.learn(&OpfOre, &sample, &mut derive_trial_rng(2, 0))
    else {
        panic!("expected a comparator");
    };
    assert_eq!(OpfOre.dec(&km.sk, h.anchor()), Some(msg(20, 8)));
}

/// The hypothesis is `m ≤ largest positive`, so over the uniform domain its
/// error is the count of positives it misses.
fn expected_error(t: u64, largest_positive: Option<u64>, n: u64) -> f64 {
    match largest_positive {
        None => t as f64 / n as f64,
        Some(a) => (t - 1 - a) as f64 / n as f64,
    }
}

#[test]
fn one_sided_error_sweep_at_ell_6() {
    let km = keys(6, 6);
    let mut rng = derive_trial_rng(3, 0);
    let dist = FiniteDistribution::all_messages(&OpfOre, &km, &mut rng).unwrap();
    let base = EncThreshConcept::new(0, km.clone()).unwrap();
    for t in 0..=64u64 {
        let f = base.with_threshold(t as u128).unwrap();
        for _ in 0..20 {
            let size = rng.gen_range(0..12);
            let values: Vec<u64> = (0..size).map(|_| rng.gen_range(0..64)).collect();
            let sample: Vec<_> = values
                .iter()
                .map(|&v| f.label(&OpfOre, example(&km, v)))
                .collect();
            let h = ComparatorLearner.learn(&OpfOre, &sample, &mut rng);
            let est = exact_error(&OpfOre, &h, &f, &dist);
            assert_eq!(est.one_sided_violations, 0);
            let largest = values.iter().copied().filter(|&v| v < t).max();
            assert!(
                (est.rate - expected_error(t, largest, 64)).abs() < 1e-12,
                "t={t} {values:?}"
            );
        }
    }
}

#[test]
fn one_sided_on_random_probes_at_ell_32() {
    let km = keys(32, 7);
    let mut rng = derive_trial_rng(4, 0);
    let dist = UniformMessages::new(km.clone());
    for _ in 0..10 {
        let t = rng.gen_range(0..=1u64 << 32) as u128;
        let f = EncThreshConcept::new(t, km.clone()).unwrap();
        let sample = draw_sample(&OpfOre, &f, &dist, 60, &mut rng);
        let h = ComparatorLearner.learn(&OpfOre, &sample, &mut rng);
        let est = empirical_error(&OpfOre, &h, &f, &dist, 1000, &mut rng).unwrap();
        assert_eq!(est.one_sided_violations, 0);
    }
}

#[test]
fn hypotheses_are_nested_in_the_anchor() {
    let km = keys(6, 8);
    let mut rng = derive_trial_rng(5, 0);
    let predictions: Vec<Vec<bool>> = (0..64)
        .map(|a| {
            let h = ComparatorLearner.learn(&OpfOre, &[labeled(&km, a, true)], &mut rng);
            (0..64)
                .map(|v| h.predict_example(&OpfOre, &example(&km, v)))
                .collect()
        })
        .collect();
    for w in predictions.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(lo, hi)| !lo || *hi));
        assert_eq!(
            w[1].iter().filter(|&&p| p).count(),
            w[0].iter().filter(|&&p| p).count() + 1
        );
    }
}

#[test]
fn sample_size_values() {
    assert_eq!(required_sample_size(0.05, 0.05).unwrap(), 60);
    assert_eq!(required_sample_size(0.01, 0.05).unwrap(), 300);
    assert_eq!(required_sample_size(0.1, 0.1).unwrap(), 24);
    assert!(required_sample_size(1.0, 0.1).is_err());
    for (a, b) in [(0.05, 0.05), (0.2, 0.3), (0.013, 0.001)] {
        let n = required_sample_size(a, b).unwrap() as f64;
        assert!(n >= (1.0f64 / b).ln() / a - 1e-9 && n - 1.0 < (1.0f64 / b).ln() / a);
    }
}

#[test]
fn exact_error_extremes() {
    let km = keys(6, 9);
    let mut rng = derive_trial_rng(6, 0);
    let dist = FiniteDistribution::all_messages(&OpfOre, &km, &mut rng).unwrap();
    let f = EncThreshConcept::new(40, km.clone()).unwrap();
    let h = ComparatorLearner.learn(&OpfOre, &[labeled(&km, 39, true)], &mut rng);
    assert_eq!(exact_error(&OpfOre, &h, &f, &dist).rate, 0.0);

    let atoms = vec![(example(&km, 3), 1.0)];
    let point = FiniteDistribution::new(atoms).unwrap();
    let zero: EncHypothesis<OpfOre> = EncHypothesis::AllZeroes;
    let est = exact_error(&OpfOre, &zero, &f, &point);
    assert_eq!(est.rate, 1.0);
    assert_eq!(est.one_sided_violations, 0);
}

#[test]
fn every_family_builds_and_labels() {
    let s = escrow_ore();
    let km = Arc::new(KeyMaterial::generate(&s, 128, 16, [3; 32]).unwrap());
    let mut rng = derive_trial_rng(7, 0);
    let f = EncThreshConcept::new(1 << 15, km.clone()).unwrap();
    for kind in DistributionKind::ALL {
        let dist = kind.build(&s, &km, &mut rng).unwrap();
        let sample = draw_sample(&s, &f, dist.as_ref(), 200, &mut rng);
        let h = ComparatorLearner.learn(&s, &sample, &mut rng);
        let est = empirical_error(&s, &h, &f, dist.as_ref(), 2000, &mut rng).unwrap();
        assert_eq!(est.one_sided_violations, 0, "{}", kind.as_str());
        assert!(est.rate <= 0.05, "{}: {}", kind.as_str(), est.rate);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn learned_hypothesis_never_says_one_on_a_negative(
        coin in any::<u8>(),
        t in 0u64..=1 << 12,
        values in proptest::collection::vec(0u64..1 << 12, 0..30),
        probes in proptest::collection::vec(0u64..1 << 12, 50),
    ) {
        let km = keys(12, coin);
        let f = EncThreshConcept::new(t as u128, km.clone()).unwrap();
        let sample: Vec<_> = values.iter().map(|&v| f.label(&OpfOre, example(&km, v))).collect();
        let h = ComparatorLearner.learn(&OpfOre, &sample, &mut derive_trial_rng(8, 0));
        for v in probes {
            let x = example(&km, v);
            prop_assert!(!h.predict_example(&OpfOre, &x) || f.evaluate(&OpfOre, &x));
        }
    }
}
