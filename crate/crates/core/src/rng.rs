//! Deterministic random streams.
//!
//! Every trial of every experiment owns a ChaCha20 stream whose 32-byte seed is
//! `SHA-256("ore-learn/trial/v1" ‖ master_seed_le ‖ trial_index_le)`. Sub-streams
//! (per bucket, per key, ...) are derived the same way from a parent seed and a
//! label, so results never depend on scheduling order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Seed = [u8; 32];

const TRIAL_DOMAIN: &[u8] = b"ore-learn/trial/v1";
const STREAM_DOMAIN: &[u8] = b"ore-learn/stream/v1";

pub fn trial_seed(master_seed: u64, trial_index: u64) -> Seed {
    let mut h = Sha256::new();
    h.update(TRIAL_DOMAIN);
    h.update(master_seed.to_le_bytes());
    h.update(trial_index.to_le_bytes());
    h.finalize().into()
}

/// The RNG stream for trial `trial_index` of a run seeded with `master_seed`.
pub fn derive_trial_rng(master_seed: u64, trial_index: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(trial_seed(master_seed, trial_index))
}

pub fn stream_seed(parent: &Seed, label: &str, index: u64) -> Seed {
    let mut h = Sha256::new();
    h.update(STREAM_DOMAIN);
    h.update(parent);
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

pub fn derive_stream(parent: &Seed, label: &str, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(stream_seed(parent, label, index))
}

pub fn fresh_seed(rng: &mut dyn RngCore) -> Seed {
    let mut s = [0u8; 32];
    rng.fill_bytes(&mut s);
    s
}

pub fn rng_from_seed(seed: Seed) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(seed)
}

/// Uniform integer in `[lo, hi)`; `hi > lo` required.
pub(crate) fn uniform_in(rng: &mut dyn RngCore, lo: u64, hi: u64) -> u64 {
    debug_assert!(hi > lo);
    let span = hi - lo;
    // Rejection sampling keeps the draw exactly uniform.
    let zone = u64::MAX - (u64::MAX - span + 1) % span;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return lo + v % span;
        }
    }
}

/// Uniform integer in `[0, bound)` for a bound up to 2^64.
pub(crate) fn uniform_below(rng: &mut dyn RngCore, bound: u128) -> u64 {
    debug_assert!((1..=1u128 << 64).contains(&bound));
    if bound == 1u128 << 64 {
        rng.next_u64()
    } else {
        uniform_in(rng, 0, bound as u64)
    }
}

pub(crate) fn bernoulli(rng: &mut dyn RngCore, p: f64) -> bool {
    // 53 random bits mapped to [0, 1).
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}

pub(crate) fn coin(rng: &mut dyn RngCore) -> bool {
    rng.next_u32() & 1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn adjacent_trials_differ() {
        let mut a = derive_trial_rng(7, 0);
        let mut b = derive_trial_rng(7, 1);
        let mut x = [0u8; 32];
        let mut y = [0u8; 32];
        a.fill_bytes(&mut x);
        b.fill_bytes(&mut y);
        assert_ne!(x, y);
    }

    #[test]
    fn trial_streams_reproduce() {
        let mut a = derive_trial_rng(99, 12);
        let mut b = derive_trial_rng(99, 12);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn master_seeds_do_not_collide() {
        let mut seen = HashSet::new();
        for s in 0..1000u64 {
            let mut r = derive_trial_rng(s, 0);
            let mut buf = [0u8; 32];
            r.fill_bytes(&mut buf);
            assert!(seen.insert(buf), "collision at master seed {s}");
        }
    }

    #[test]
    fn uniform_in_stays_in_range() {
        let mut r = derive_trial_rng(1, 1);
        for _ in 0..10_000 {
            let v = uniform_in(&mut r, 5, 9);
            assert!((5..9).contains(&v));
        }
        let v = uniform_below(&mut r, 1u128 << 64);
        let _ = v;
    }
}
