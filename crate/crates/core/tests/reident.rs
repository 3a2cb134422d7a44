mod common;

use common::{plain_value, Flaw, PlainKey, PlainOre};
use ore_learn::enc_thresh::{Classifier, ComparatorLearner, EncHypothesis, Learner};
use ore_learn::opf::OpfOre;
use ore_learn::ore::Ciphertext;
use ore_learn::reident::{
    dp_bound, estimate_bucket, first_gap, gen_ex, k_for, trace_ex, KMode, TraceSettings,
};
use ore_learn::rng::{derive_trial_rng, fresh_seed};
use proptest::prelude::*;

const STUB: PlainOre = PlainOre(Flaw::None);

/// `h(c) = 1` iff the plaintext is a multiple of 3.
struct MultipleOfThree;

impl Classifier<PlainOre> for MultipleOfThree {
    fn predict(&self, _scheme: &PlainOre, _params: &PlainKey, c: &Ciphertext) -> bool {
        plain_value(c).is_some_and(|v| v % 3 == 0)
    }
}

fn multiples_of_three(lo: u128, hi: u128) -> f64 {
    let below = |x: u128| x.div_ceil(3);
    (below(hi) - below(lo)) as f64 / (hi - lo) as f64
}

#[test]
fn k_values() {
    assert_eq!(k_for(10, 0.1, 0.1).unwrap(), 544_192);
    assert_eq!(k_for(1, 0.5, 0.5).unwrap(), 93);
    let direct = (8.0 * 2500.0 / (0.45f64 * 0.45) * (450.0f64 / 0.01).ln()).ceil() as u64;
    assert_eq!(k_for(50, 0.45, 0.01).unwrap(), direct);
    assert!(k_for(0, 0.1, 0.1).is_err());
    assert!(k_for(10, 0.6, 0.1).is_err());
    assert!(k_for(10, 0.1, 1.0).is_err());
}

fn brute_first_gap(e: &[f64], thr: f64) -> Option<usize> {
    let mut hits = vec![];
    for i in 1..e.len() {
        if e[i - 1] - e[i] >= thr {
            hits.push(i);
        }
    }
    hits.into_iter().min()
}

proptest! {
    #[test]
    fn first_gap_matches_a_scan(e in proptest::collection::vec(0.0f64..=1.0, 0..40), thr in 0.001f64..0.5) {
        prop_assert_eq!(first_gap(&e, thr), brute_first_gap(&e, thr));
    }

    #[test]
    fn dp_bound_is_the_closed_form(
        beta in 0.0f64..0.99,
        xi in 0.0f64..0.99,
        n in 1usize..10_000,
        eps in 0.0f64..5.0,
    ) {
        let b = dp_bound(beta, xi, n, eps).unwrap();
        let expected = (1.0 - beta - xi) / n as f64 - eps.exp() * xi;
        prop_assert!((b.delta - expected).abs() <= 1e-15);
        prop_assert_eq!(b.contradiction, expected > 0.0);
    }
}

#[test]
fn dp_bound_cases() {
    let b = dp_bound(0.05, 0.001, 100, 1.0).unwrap();
    assert!((b.delta - (0.949 / 100.0 - std::f64::consts::E * 0.001)).abs() < 1e-15);
    assert!(b.contradiction);
    assert!(!dp_bound(0.05, 0.1, 100, 1.0).unwrap().contradiction);
    assert!(dp_bound(0.1, 0.1, 0, 1.0).is_err());
    assert!(dp_bound(0.1, 0.1, 10, -1.0).is_err());
}

#[test]
fn gen_ex_is_well_spaced_at_ell_32() {
    let mut spaced = 0;
    for seed in 0..100 {
        let s = gen_ex(&OpfOre, 128, 50, 32, &mut derive_trial_rng(seed, 0)).unwrap();
        assert_eq!(s.bounds.len(), 52);
        assert_eq!(s.bounds[0], 0);
        assert_eq!(s.bounds[51], 1 << 32);
        assert!(s.bounds.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.concept.threshold(), 1 << 31);
        spaced += s.well_spaced as usize;
    }
    assert!(spaced >= 99);
}

#[test]
fn gen_ex_state_is_consistent() {
    let s = gen_ex(&STUB, 128, 8, 16, &mut derive_trial_rng(1, 0)).unwrap();
    for (i, &j) in s.draw_of.iter().enumerate() {
        assert_eq!(s.bounds[i + 1], s.draws[j - 1] as u128);
    }
    for (x, &v) in s.sample.iter().zip(&s.draws) {
        assert_eq!(plain_value(&x.example.c), Some(v));
        assert_eq!(x.label, v < 1 << 15);
    }
    assert!(s.junk.label);
    assert_eq!(plain_value(&s.junk.example.c), Some(0));
    for j in 1..=8 {
        let w = s.sample_without(j).unwrap();
        assert_eq!(w.len(), 8);
        for (k, x) in w.iter().enumerate() {
            let expect = if k + 1 == j { &s.junk } else { &s.sample[k] };
            assert_eq!(x.example.c, expect.example.c);
            assert_eq!(x.label, expect.label);
        }
    }
    assert!(s.sample_without(0).is_err());
    assert!(s.sample_without(9).is_err());
}

#[test]
fn tiny_domains_collide() {
    let mut crowded_and_degraded = 0;
    for seed in 0..20 {
        let s = gen_ex(&STUB, 128, 2, 2, &mut derive_trial_rng(seed, 0)).unwrap();
        assert!(s.crowded());
        assert_eq!(s.bounds.len(), 4);
        assert_eq!(s.bounds[3], 4);
        let settings = TraceSettings::new(0.25, 0.25, KMode::Full).unwrap();
        let h = MultipleOfThree;
        let v = trace_ex(&STUB, &s, &h, &settings, &[seed as u8; 32]).unwrap();
        crowded_and_degraded += v.degraded as usize;
        assert!(!s.well_spaced || !v.degraded);
    }
    assert!(crowded_and_degraded > 0);
}

#[test]
fn all_zeroes_estimates_are_zero() {
    let s = gen_ex(&OpfOre, 128, 10, 32, &mut derive_trial_rng(2, 0)).unwrap();
    let mut settings = TraceSettings::new(0.2, 0.1, KMode::Reduced { cap: 500 }).unwrap();
    settings.lazy = false;
    let h: EncHypothesis<OpfOre> = EncHypothesis::AllZeroes;
    let v = trace_ex(&OpfOre, &s, &h, &settings, &[1; 32]).unwrap();
    assert_eq!(v.estimates, vec![0.0; 11]);
    assert_eq!(v.accused, None);
    assert!(v.k_reduced);
    assert_eq!(v.k_used, 500);
}

#[test]
fn bucket_estimates_concentrate_on_closed_form_rates() {
    let s = gen_ex(&STUB, 128, 6, 16, &mut derive_trial_rng(3, 0)).unwrap();
    let mut rng = derive_trial_rng(3, 1);
    for i in 0..=6 {
        if s.bucket_is_empty(i) {
            continue;
        }
        let (lo, hi) = s.bucket(i);
        let p = multiples_of_three(lo, hi);
        let est = estimate_bucket(&STUB, &s, &MultipleOfThree, i, 40_000, &mut rng);
        // Four standard deviations at the worst case p = 1/2.
        assert!((est - p).abs() <= 0.01, "bucket {i}: {est} vs {p}");
    }
}

#[test]
fn trace_is_a_function_of_the_coins() {
    let s = gen_ex(&STUB, 128, 6, 16, &mut derive_trial_rng(4, 0)).unwrap();
    let settings = TraceSettings::new(0.2, 0.1, KMode::Reduced { cap: 3000 }).unwrap();
    let a = trace_ex(&STUB, &s, &MultipleOfThree, &settings, &[9; 32]).unwrap();
    let b = trace_ex(&STUB, &s, &MultipleOfThree, &settings, &[9; 32]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn comparator_trained_on_everything_accuses_the_largest_positive() {
    let mut rng = derive_trial_rng(5, 0);
    let mut checked = 0;
    for _ in 0..20 {
        let s = gen_ex(&STUB, 128, 6, 16, &mut rng).unwrap();
        if !s.well_spaced {
            continue;
        }
        let positives = s.bounds[1..=6].iter().filter(|&&m| m < 1 << 15).count();
        if positives == 0 {
            continue;
        }
        let h = ComparatorLearner.learn(&STUB, &s.sample, &mut rng);
        let mut settings = TraceSettings::new(0.45, 0.1, KMode::Reduced { cap: 5000 }).unwrap();
        settings.lazy = false;
        let v = trace_ex(&STUB, &s, &h, &settings, &fresh_seed(&mut rng)).unwrap();
        // The hypothesis is 1 exactly below the largest positive draw, so
        // bucket `positives` is where the rate first drops.
        let (lo, hi) = s.bucket(positives);
        assert!((v.estimates[positives] - 1.0 / (hi - lo) as f64).abs() < 0.05);
        assert_eq!(v.accused_bucket, Some(positives));
        assert_eq!(v.accused, Some(s.draw_of[positives - 1]));
        checked += 1;
    }
    assert!(checked >= 10);
}
