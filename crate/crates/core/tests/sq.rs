use std::sync::Arc;

use ore_learn::enc_thresh::{exact_error, EncThreshConcept, FiniteDistribution};
use ore_learn::opf::OpfOre;
use ore_learn::ore::{KeyMaterial, OreScheme};
use ore_learn::rng::derive_trial_rng;
use ore_learn::sq::{
    check_key_equivalence, run_sq_experiment, sq_learn, tau_floor, tiny_coins, AnswerMode,
    KeyRecovery, Keyspace, KnownKeys, SqHypothesis, SqSettings, StatOracle, TinyCoinSearch,
    MAX_EQUIVALENCE_ELL,
};
use ore_learn::strengthen::escrow_ore;
use ore_learn::Error;

struct World<S: OreScheme> {
    keys: Arc<KeyMaterial<S>>,
    concept: EncThreshConcept<S>,
    dist: FiniteDistribution<S>,
}

fn world<S: OreScheme>(scheme: &S, ell: u8, t: u128, coin: u8) -> World<S> {
    let keys = Arc::new(KeyMaterial::generate(scheme, 128, ell, [coin; 32]).unwrap());
    let concept = EncThreshConcept::new(t, keys.clone()).unwrap();
    let dist =
        FiniteDistribution::all_messages(scheme, &keys, &mut derive_trial_rng(coin as u64, 0))
            .unwrap();
    World {
        keys,
        concept,
        dist,
    }
}

#[test]
fn label_query_is_the_positive_mass() {
    let w = world(&OpfOre, 8, 100, 1);
    let mut o = StatOracle::new(
        &OpfOre,
        &w.concept,
        &w.dist,
        AnswerMode::Exact,
        0.05,
        [0; 32],
    )
    .unwrap();
    let floor = o.tau_floor();
    assert!((o.stat_query(|x| x.label, floor).unwrap() - 100.0 / 256.0).abs() < 1e-12);
    assert_eq!(o.stat_query(|_| true, 0.1).unwrap(), 1.0);
    assert_eq!(o.stat_query(|_| false, 0.1).unwrap(), 0.0);
    assert_eq!(o.queries(), 3);
    assert!((o.expectation(|x| !x.label) - 156.0 / 256.0).abs() < 1e-12);
    assert_eq!(o.queries(), 3);
}

#[test]
fn tolerance_below_the_floor_is_rejected() {
    let w = world(&OpfOre, 8, 100, 2);
    let mut o = StatOracle::new(
        &OpfOre,
        &w.concept,
        &w.dist,
        AnswerMode::Exact,
        0.05,
        [0; 32],
    )
    .unwrap();
    let floor = tau_floor(8, 0.05);
    assert!((floor - 1.0 / (64.0 * 8.0 * 20.0)).abs() < 1e-18);
    assert!(matches!(
        o.stat_query(|x| x.label, floor / 2.0),
        Err(Error::Usage(_))
    ));
    assert_eq!(o.queries(), 0);
}

#[test]
fn jitter_stays_within_tolerance() {
    let w = world(&OpfOre, 8, 77, 3);
    let mut o = StatOracle::new(
        &OpfOre,
        &w.concept,
        &w.dist,
        AnswerMode::Jitter,
        0.05,
        [5; 32],
    )
    .unwrap();
    let exact = 77.0 / 256.0;
    let mut moved = 0;
    for i in 0..10_000 {
        let tau = 0.001 + (i % 7) as f64 * 0.01;
        let a = o.stat_query(|x| x.label, tau).unwrap();
        assert!((a - exact).abs() <= tau + 1e-12);
        moved += (a != exact) as usize;
    }
    assert!(moved > 9_900);
}

#[test]
fn no_positive_mass_gives_all_zeroes_after_one_query() {
    let w = world(&OpfOre, 8, 0, 4);
    let mut o = StatOracle::new(
        &OpfOre,
        &w.concept,
        &w.dist,
        AnswerMode::Exact,
        0.05,
        [0; 32],
    )
    .unwrap();
    let out = sq_learn(&OpfOre, &mut o, 0.05, &KnownKeys::new(vec![w.keys.clone()])).unwrap();
    assert!(matches!(out.hypothesis, SqHypothesis::AllZeroes));
    assert_eq!(out.queries, 1);
}

#[test]
fn recovered_threshold_is_close_for_every_t_at_ell_6() {
    let alpha = 0.05;
    for t in 0..=64u128 {
        let w = world(&OpfOre, 6, t, 5);
        let recovery = KnownKeys::new(vec![w.keys.clone()]);
        let mut o = StatOracle::new(
            &OpfOre,
            &w.concept,
            &w.dist,
            AnswerMode::Exact,
            alpha,
            [0; 32],
        )
        .unwrap();
        let out = sq_learn(&OpfOre, &mut o, alpha, &recovery).unwrap();
        // Uniform over the domain, so the error is the mass between the thresholds.
        let expected = match out.hypothesis.threshold() {
            Some(r) => r.abs_diff(t) as f64 / 64.0,
            None => t as f64 / 64.0,
        };
        let err = exact_error(&OpfOre, &out.hypothesis, &w.concept, &w.dist).rate;
        assert!((err - expected).abs() < 1e-12, "t={t}");
        assert!(err <= alpha, "t={t}: {err}");
        assert!(out.queries <= 1 + OpfOre.params_len(6) * 8 + 6);
        if let SqHypothesis::Threshold { params, .. } = &out.hypothesis {
            assert_eq!(**params, w.keys.params);
        }
    }
}

#[test]
fn threshold_search_under_jitter_at_ell_10() {
    let alpha = 0.05;
    let s = escrow_ore();
    let mut rng = derive_trial_rng(6, 0);
    for trial in 0..10u8 {
        let t = rand::Rng::gen_range(&mut rng, 0..=1024u128);
        let w = world(&s, 10, t, trial);
        let mut o = StatOracle::new(
            &s,
            &w.concept,
            &w.dist,
            AnswerMode::Jitter,
            alpha,
            [trial; 32],
        )
        .unwrap();
        let out = sq_learn(&s, &mut o, alpha, &KnownKeys::new(vec![w.keys.clone()])).unwrap();
        let err = exact_error(&s, &out.hypothesis, &w.concept, &w.dist).rate;
        assert!(err <= alpha, "t={t}: {err}");
        assert!(out.steps.len() <= 10);
    }
}

#[test]
fn unknown_params_fail_recovery() {
    let w = world(&OpfOre, 6, 40, 7);
    let other = Arc::new(KeyMaterial::generate(&OpfOre, 128, 6, [8; 32]).unwrap());
    let mut o = StatOracle::new(
        &OpfOre,
        &w.concept,
        &w.dist,
        AnswerMode::Exact,
        0.05,
        [0; 32],
    )
    .unwrap();
    let r = sq_learn(&OpfOre, &mut o, 0.05, &KnownKeys::new(vec![other]));
    assert!(matches!(r, Err(Error::KeyRecovery(_))));
}

#[test]
fn tiny_search_finds_the_coins() {
    let search = TinyCoinSearch::new(128, 8, 6).unwrap();
    assert_eq!(search.size(), 64);
    let km = KeyMaterial::generate(&OpfOre, 128, 8, tiny_coins(41)).unwrap();
    let sk = search.recover(&OpfOre, &km.params).unwrap();
    let report =
        check_key_equivalence(&OpfOre, &sk, &km.sk, 8, 50, &mut derive_trial_rng(9, 0)).unwrap();
    assert!(report.equivalent());
    let outside = KeyMaterial::generate(&OpfOre, 128, 8, [200; 32]).unwrap();
    assert!(search.recover(&OpfOre, &outside.params).is_err());
    assert!(TinyCoinSearch::new(128, 8, 17).is_err());
    assert_ne!(tiny_coins(0), tiny_coins(1));
}

#[test]
fn key_equivalence_checks() {
    let mut rng = derive_trial_rng(10, 0);
    let a = KeyMaterial::generate(&OpfOre, 128, 10, [1; 32]).unwrap();
    let a2 = KeyMaterial::generate(&OpfOre, 128, 10, [1; 32]).unwrap();
    let b = KeyMaterial::generate(&OpfOre, 128, 10, [2; 32]).unwrap();
    let r = check_key_equivalence(&OpfOre, &a.sk, &a.sk, 10, 100, &mut rng).unwrap();
    assert!(r.equivalent());
    assert_eq!(r.checked, 2 * 1024 + 200);
    assert!(
        check_key_equivalence(&OpfOre, &a.sk, &a2.sk, 10, 100, &mut rng)
            .unwrap()
            .equivalent()
    );
    let r = check_key_equivalence(&OpfOre, &a.sk, &b.sk, 10, 0, &mut rng).unwrap();
    assert!(!r.equivalent());
    assert!(r.mismatch_count >= 2000);
    let big = KeyMaterial::generate(&OpfOre, 128, MAX_EQUIVALENCE_ELL + 1, [1; 32]).unwrap();
    assert!(check_key_equivalence(
        &OpfOre,
        &big.sk,
        &big.sk,
        MAX_EQUIVALENCE_ELL + 1,
        0,
        &mut rng
    )
    .is_err());
}

#[test]
fn experiment_meets_its_bounds() {
    let settings = SqSettings {
        lambda: 128,
        ell: 12,
        alpha: 0.05,
        mode: AnswerMode::Jitter,
        keyspace: Keyspace::Oracle,
        trials: 8,
        seed: 11,
    };
    let r = run_sq_experiment(&OpfOre, &settings).unwrap();
    assert!(r.all_good);
    assert!(r
        .rows
        .iter()
        .all(|row| row.error <= 0.05 && row.queries <= row.query_bound));
    assert_eq!(r, run_sq_experiment(&OpfOre, &settings).unwrap());
}
