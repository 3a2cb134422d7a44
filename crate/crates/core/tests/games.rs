use ore_learn::enc_thresh::{ComparatorLearner, ZeroLearner};
use ore_learn::games::reduction::escrow_oracle;
use ore_learn::games::{
    adversary_success_prob, hybrid_schedule, run_single_challenge_game, run_static_game,
    ChallengePair, FromLearner, GameSettings, IdenticalSides, LeakedKeyDecryptor, LearnerAdversary,
    OrderReader, PayloadProbe, RandomGuesser, SyntheticBuckets,
};
use ore_learn::opf::OpfOre;
use ore_learn::strengthen::{escrow_ore, signature_ore};
use ore_learn::Error;
use proptest::prelude::*;

fn settings(ell: u8, trials: usize, seed: u64) -> GameSettings {
    GameSettings {
        lambda: 128,
        ell,
        trials,
        seed,
        full_transcripts: false,
    }
}

/// Win probability by enumerating the challenge bit, the bucket the
/// same-bucket side uses, and the hypothesis outputs on both challenge points.
fn enumerate_success(p: f64, q: f64) -> f64 {
    let bern = |pr: f64, y: bool| if y { pr } else { 1.0 - pr };
    let mut win = 0.0;
    for b in [false, true] {
        for bucket_is_low in [false, true] {
            for y0 in [false, true] {
                for y1 in [false, true] {
                    let (r0, r1) = match (b, bucket_is_low) {
                        (false, true) => (p, p),
                        (false, false) => (q, q),
                        (true, _) => (p, q),
                    };
                    // The right side does not use the bucket coin; split its weight.
                    let w = 0.5 * 0.5 * bern(r0, y0) * bern(r1, y1);
                    let guess_right = y0 != y1;
                    if guess_right == b {
                        win += w;
                    }
                }
            }
        }
    }
    win
}

#[test]
fn success_formula_matches_enumeration_on_grid() {
    for i in 0..=20 {
        for j in 0..=20 {
            let (p, q) = (i as f64 * 0.05, j as f64 * 0.05);
            let f = adversary_success_prob(p, q).unwrap();
            assert!((f - enumerate_success(p, q)).abs() <= 1e-12, "({p}, {q})");
            assert!((f - (0.5 + 0.5 * (p - q) * (p - q))).abs() <= 1e-12);
        }
    }
}

#[test]
fn hybrid_examples() {
    let h = hybrid_schedule(&ChallengePair::new(vec![3], vec![7]), 4).unwrap();
    assert_eq!(h, vec![vec![3], vec![3], vec![7]]);
    let h = hybrid_schedule(&ChallengePair::new(vec![1, 5, 9], vec![2, 5, 8]), 4).unwrap();
    assert_eq!(h.len(), 7);
    assert_eq!(h[3], vec![1, 5, 8]);
    assert_eq!(h[6], vec![2, 5, 8]);
    assert!(matches!(
        hybrid_schedule(&ChallengePair::new(vec![4, 2], vec![1, 2]), 4),
        Err(Error::InvalidChallenge(_))
    ));
}

fn ascending(max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::btree_set(0u64..256, 1..=max_len).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn hybrid_schedule_properties(
        (l, r) in (1usize..=6).prop_flat_map(|q| (
            proptest::collection::btree_set(0u64..256, q),
            proptest::collection::btree_set(0u64..256, q),
        ))
    ) {
        let pair = ChallengePair::new(l.into_iter().collect(), r.into_iter().collect());
        let h = hybrid_schedule(&pair, 8).unwrap();
        let q = pair.q();
        prop_assert_eq!(h.len(), 2 * q + 1);
        prop_assert_eq!(&h[0], &pair.left);
        prop_assert_eq!(&h[2 * q], &pair.right);
        for v in &h {
            prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
        for w in h.windows(2) {
            prop_assert!(w[0].iter().zip(&w[1]).filter(|(a, b)| a != b).count() <= 1);
        }
        let middle: Vec<u64> = pair.left.iter().zip(&pair.right).map(|(a, b)| *a.min(b)).collect();
        prop_assert_eq!(&h[q], &middle);
    }

    #[test]
    fn identical_sides_give_constant_schedules(v in ascending(6)) {
        let h = hybrid_schedule(&ChallengePair::new(v.clone(), v.clone()), 8).unwrap();
        prop_assert!(h.iter().all(|x| x == &v));
    }

    #[test]
    fn unequal_lengths_are_rejected(a in ascending(4), b in ascending(4)) {
        prop_assume!(a.len() != b.len());
        prop_assert!(ChallengePair::new(a, b).validate(8).is_err());
    }
}

#[test]
fn random_guesser_has_no_advantage() {
    let r = run_static_game(&OpfOre, &RandomGuesser { q: 3 }, &settings(16, 10_000, 1)).unwrap();
    assert!(r.advantage.advantage <= 0.03, "{}", r.advantage.advantage);
    assert!(r.advantage.covers(0.0));
    let r = run_single_challenge_game(
        &escrow_ore(),
        &RandomGuesser { q: 3 },
        &settings(16, 4000, 2),
    )
    .unwrap();
    assert!(r.advantage.covers(0.0));
}

#[test]
fn identical_sides_have_no_advantage() {
    let r = run_static_game(&OpfOre, &IdenticalSides { q: 4 }, &settings(16, 4000, 3)).unwrap();
    assert!(r.advantage.covers(0.0));
}

#[test]
fn order_reading_challenge_is_rejected() {
    let r = run_static_game(&OpfOre, &OrderReader, &settings(16, 10, 4));
    assert!(matches!(r, Err(Error::InvalidChallenge(_))));
}

#[test]
fn payload_probe_learns_nothing() {
    let r = run_single_challenge_game(
        &escrow_ore(),
        &PayloadProbe { q: 3 },
        &settings(16, 4000, 5),
    )
    .unwrap();
    assert!(r.advantage.covers(0.0), "{:?}", r.advantage);
    let r = run_single_challenge_game(
        &signature_ore(),
        &PayloadProbe { q: 3 },
        &settings(16, 1000, 5),
    )
    .unwrap();
    assert!(r.advantage.covers(0.0));
}

#[test]
fn leaked_key_decryptor_wins() {
    let r = run_single_challenge_game(
        &escrow_ore(),
        &LeakedKeyDecryptor { q: 3 },
        &settings(16, 2000, 6),
    )
    .unwrap();
    assert!(r.advantage.advantage >= 0.9);
    assert_eq!(r.flagged, 0);
}

#[test]
fn games_reproduce_from_the_seed() {
    let mut s = settings(16, 200, 7);
    s.full_transcripts = true;
    let a = run_static_game(&OpfOre, &RandomGuesser { q: 3 }, &s).unwrap();
    let b = run_static_game(&OpfOre, &RandomGuesser { q: 3 }, &s).unwrap();
    assert_eq!(a.transcripts, b.transcripts);
    assert!(a.transcripts.iter().all(|t| t.win == (t.b == t.guess)));
    assert!(a.transcripts[0]
        .ciphertexts
        .as_ref()
        .is_some_and(|c| c.len() == 3));
}

#[test]
fn reduction_with_constant_or_random_guesses_has_no_advantage() {
    let adv = LearnerAdversary::new(20, 3, FromLearner(ZeroLearner)).unwrap();
    let r = run_static_game(&escrow_ore(), &adv, &settings(32, 2000, 8)).unwrap();
    assert!(r.advantage.covers(0.0));
    assert!(r.transcripts.iter().all(|t| t.flagged || !t.guess));

    let mut adv = LearnerAdversary::new(20, 3, FromLearner(ComparatorLearner)).unwrap();
    adv.force_random = true;
    let r = run_static_game(&escrow_ore(), &adv, &settings(32, 2000, 9)).unwrap();
    assert!(r.advantage.covers(0.0));
}

#[test]
fn reduction_index_is_validated() {
    assert!(LearnerAdversary::new(5, 0, FromLearner(ZeroLearner)).is_err());
    assert!(LearnerAdversary::new(5, 6, FromLearner(ZeroLearner)).is_err());
    assert!(SyntheticBuckets::<
        ore_learn::strengthen::Strengthened<OpfOre, ore_learn::strengthen::EscrowCertifier>,
    >::new(1.5, 0.0, escrow_oracle(OpfOre))
    .is_err());
}

#[test]
fn synthetic_buckets_track_the_formula() {
    for (p, q) in [(1.0, 0.0), (0.75, 0.25), (0.5, 0.5)] {
        let adv = LearnerAdversary::new(
            5,
            2,
            SyntheticBuckets::new(p, q, escrow_oracle(OpfOre)).unwrap(),
        )
        .unwrap();
        let r = run_static_game(&escrow_ore(), &adv, &settings(32, 4000, 10)).unwrap();
        let expected = adversary_success_prob(p, q).unwrap();
        assert!(
            (r.unflagged.win_rate - expected).abs() <= 0.03,
            "({p}, {q}): {}",
            r.unflagged.win_rate
        );
    }
}
