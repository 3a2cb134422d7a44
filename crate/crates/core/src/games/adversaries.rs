//! Baseline adversaries and negative controls.

use std::collections::BTreeSet;

use rand::RngCore;

use super::{Adversary, ChallengePair, Guess, SingleChallenge, SingleChallengeAdversary};
use crate::opf::{read_payload, OpfOre};
use crate::ore::{
    domain_size, Ciphertext, CompareResult, DeterministicOre, Ordering3, OreScheme, PlaintextLen,
};
use crate::rng::{coin, uniform_below};
use crate::strengthen::{split, Certifier, EscrowCertifier, Strengthened};

/// `count` distinct messages from the `ell`-bit domain, ascending.
pub(crate) fn sorted_distinct(rng: &mut dyn RngCore, count: usize, ell: u8) -> Vec<u64> {
    let n = domain_size(ell);
    assert!(
        count as u128 <= n,
        "cannot draw {count} distinct messages from {n}"
    );
    let mut set = BTreeSet::new();
    while set.len() < count {
        set.insert(uniform_below(rng, n));
    }
    set.into_iter().collect()
}

/// A random fixed sequence of length `q` with a random sandwiched challenge.
pub(crate) fn random_single_challenge(rng: &mut dyn RngCore, q: usize, ell: u8) -> SingleChallenge {
    let mut v = sorted_distinct(rng, q + 2, ell);
    // Take two neighbours out of the middle of the draw as the challenge.
    let at = 1 + uniform_below(rng, (q - 1) as u128) as usize;
    let m_right = v.remove(at + 1);
    let m_left = v.remove(at);
    SingleChallenge {
        messages: v,
        m_left,
        m_right,
    }
}

/// Random valid challenges, coin-flip guesses.
#[derive(Clone, Copy, Debug)]
pub struct RandomGuesser {
    pub q: usize,
}

impl<S: OreScheme> Adversary<S> for RandomGuesser {
    type State = ();

    fn name(&self) -> String {
        "random_guesser".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (ChallengePair, ()) {
        let left = sorted_distinct(rng, self.q, ell);
        let right = sorted_distinct(rng, self.q, ell);
        (ChallengePair { left, right }, ())
    }

    fn guess(&self, _: &S, _: (), _: &S::Params, _: &[Ciphertext], rng: &mut dyn RngCore) -> Guess {
        Guess::bit(coin(rng))
    }
}

impl<S: OreScheme> SingleChallengeAdversary<S> for RandomGuesser {
    type State = ();

    fn name(&self) -> String {
        "random_guesser".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (SingleChallenge, ()) {
        (random_single_challenge(rng, self.q.max(2), ell), ())
    }

    fn guess(
        &self,
        _: &S,
        _: (),
        _: &S::Params,
        _: &[Ciphertext],
        _: &Ciphertext,
        rng: &mut dyn RngCore,
    ) -> Guess {
        Guess::bit(coin(rng))
    }
}

/// Submits the same sequence on both sides and guesses from ciphertext bits.
#[derive(Clone, Copy, Debug)]
pub struct IdenticalSides {
    pub q: usize,
}

impl<S: OreScheme> Adversary<S> for IdenticalSides {
    type State = ();

    fn name(&self) -> String {
        "identical_sides".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (ChallengePair, ()) {
        let v = sorted_distinct(rng, self.q, ell);
        (ChallengePair::new(v.clone(), v), ())
    }

    fn guess(&self, _: &S, _: (), _: &S::Params, cts: &[Ciphertext], _: &mut dyn RngCore) -> Guess {
        let bit = cts
            .first()
            .and_then(|c| c.as_bytes().last())
            .is_some_and(|b| b & 1 == 1);
        Guess::bit(bit)
    }
}

/// Submits two messages in opposite orders and reads the order back. The
/// game must reject its challenge.
#[derive(Clone, Copy, Debug)]
pub struct OrderReader;

impl<S: OreScheme> Adversary<S> for OrderReader {
    type State = ();

    fn name(&self) -> String {
        "order_reader".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (ChallengePair, ()) {
        let v = sorted_distinct(rng, 2, ell);
        (ChallengePair::new(v.clone(), vec![v[1], v[0]]), ())
    }

    fn guess(
        &self,
        scheme: &S,
        _: (),
        params: &S::Params,
        cts: &[Ciphertext],
        _: &mut dyn RngCore,
    ) -> Guess {
        let flipped =
            scheme.comp(params, &cts[0], &cts[1]) == CompareResult::Ordered(Ordering3::Gt);
        Guess::bit(flipped)
    }
}

/// Single-challenge adversary against strengthened OPF ciphertexts that looks
/// only at the masked payload of the challenge.
#[derive(Clone, Copy, Debug)]
pub struct PayloadProbe {
    pub q: usize,
}

impl<C: Certifier<OpfOre>> SingleChallengeAdversary<Strengthened<OpfOre, C>> for PayloadProbe {
    type State = ();

    fn name(&self) -> String {
        "payload_probe".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (SingleChallenge, ()) {
        (random_single_challenge(rng, self.q.max(2), ell), ())
    }

    fn guess(
        &self,
        _: &Strengthened<OpfOre, C>,
        _: (),
        params: &<Strengthened<OpfOre, C> as OreScheme>::Params,
        _: &[Ciphertext],
        challenge: &Ciphertext,
        rng: &mut dyn RngCore,
    ) -> Guess {
        let ell = params.ell();
        let payload = split(ell, challenge)
            .and_then(|(inner, _)| read_payload(ell, &inner).map(<[u8]>::to_vec));
        match payload.and_then(|p| p.first().copied()) {
            Some(byte) => Guess::bit(byte & 1 == 1),
            None => Guess::random(rng),
        }
    }
}

/// Negative control: decrypts the challenge with the base key escrowed in the
/// parameters.
#[derive(Clone, Copy, Debug)]
pub struct LeakedKeyDecryptor {
    pub q: usize,
}

impl<B: DeterministicOre> SingleChallengeAdversary<Strengthened<B, EscrowCertifier>>
    for LeakedKeyDecryptor
{
    type State = u64;

    fn name(&self) -> String {
        "leaked_key".into()
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (SingleChallenge, u64) {
        let ch = random_single_challenge(rng, self.q.max(2), ell);
        let right = ch.m_right;
        (ch, right)
    }

    fn guess(
        &self,
        scheme: &Strengthened<B, EscrowCertifier>,
        m_right: u64,
        params: &<Strengthened<B, EscrowCertifier> as OreScheme>::Params,
        _: &[Ciphertext],
        challenge: &Ciphertext,
        rng: &mut dyn RngCore,
    ) -> Guess {
        let m = split(params.ell(), challenge)
            .and_then(|(inner, _)| scheme.base.dec(params.vk.leak(), &inner));
        match m {
            Some(m) => Guess::bit(m.value() == m_right),
            None => Guess::random(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_trial_rng;

    #[test]
    fn random_single_challenges_are_valid() {
        let mut rng = derive_trial_rng(4, 0);
        for q in 2..6 {
            for _ in 0..200 {
                let ch = random_single_challenge(&mut rng, q, 4);
                assert_eq!(ch.messages.len(), q);
                ch.validate(4).unwrap();
            }
        }
    }
}
