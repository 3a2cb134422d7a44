//! Indistinguishability games.
//!
//! In the static game the adversary submits two strictly ascending message
//! sequences of equal length, receives `params` and encryptions of one of them
//! under fresh keys, and guesses which. The single-challenge game fixes a
//! sequence `m_1 < … < m_q` and two challenge messages sandwiched between a
//! consecutive pair, `m_i < m_L < m_R < m_{i+1}`, and returns the sequence's
//! ciphertexts together with an encryption of one challenge.

pub mod adversaries;
pub mod hybrid;
pub mod reduction;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::Encodable;
use crate::error::{Error, Result};
use crate::ore::{domain_size, Ciphertext, Message, OreScheme};
use crate::rng::{coin, derive_trial_rng, trial_seed};
use crate::stats::Advantage;

pub use adversaries::{
    IdenticalSides, LeakedKeyDecryptor, OrderReader, PayloadProbe, RandomGuesser,
};
pub use hybrid::hybrid_schedule;
pub use reduction::{
    adversary_success_prob, FromLearner, HypothesisSource, LearnerAdversary, SyntheticBuckets,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengePair {
    pub left: Vec<u64>,
    pub right: Vec<u64>,
}

fn check_sequence(side: &str, v: &[u64], ell: u8) -> Result<()> {
    let n = domain_size(ell);
    if let Some(&bad) = v.iter().find(|&&x| x as u128 >= n) {
        return Err(Error::InvalidChallenge(format!(
            "{side} message {bad} outside the {ell}-bit domain"
        )));
    }
    if let Some(w) = v.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidChallenge(format!(
            "{side} sequence not strictly ascending at {} ≥ {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl ChallengePair {
    pub fn new(left: Vec<u64>, right: Vec<u64>) -> Self {
        ChallengePair { left, right }
    }

    pub fn q(&self) -> usize {
        self.left.len()
    }

    pub fn validate(&self, ell: u8) -> Result<()> {
        if self.left.len() != self.right.len() {
            return Err(Error::InvalidChallenge(format!(
                "sequence lengths differ: {} vs {}",
                self.left.len(),
                self.right.len()
            )));
        }
        if self.left.is_empty() {
            return Err(Error::InvalidChallenge("empty sequences".into()));
        }
        check_sequence("left", &self.left, ell)?;
        check_sequence("right", &self.right, ell)
    }

    pub fn side(&self, b: bool) -> &[u64] {
        if b {
            &self.right
        } else {
            &self.left
        }
    }
}

/// A fixed sequence plus two challenge messages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleChallenge {
    pub messages: Vec<u64>,
    pub m_left: u64,
    pub m_right: u64,
}

impl SingleChallenge {
    /// Checks the sandwich condition and returns the 0-based index `i` with
    /// `messages[i] < m_left < m_right < messages[i + 1]`.
    pub fn validate(&self, ell: u8) -> Result<usize> {
        check_sequence("fixed", &self.messages, ell)?;
        check_sequence("challenge", &[self.m_left, self.m_right], ell)?;
        self.messages
            .windows(2)
            .position(|w| w[0] < self.m_left && self.m_right < w[1])
            .ok_or_else(|| {
                Error::InvalidChallenge(format!(
                    "challenge ({}, {}) not strictly between two consecutive fixed messages",
                    self.m_left, self.m_right
                ))
            })
    }

    /// The equivalent static pair: the challenge inserted into the sequence on
    /// either side. The two vectors differ in exactly one position.
    pub fn to_pair(&self, ell: u8) -> Result<ChallengePair> {
        let i = self.validate(ell)?;
        let mut left = self.messages.clone();
        let mut right = self.messages.clone();
        left.insert(i + 1, self.m_left);
        right.insert(i + 1, self.m_right);
        Ok(ChallengePair { left, right })
    }

    pub fn challenge(&self, b: bool) -> u64 {
        if b {
            self.m_right
        } else {
            self.m_left
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guess {
    pub bit: bool,
    /// Set when the adversary gave up and guessed at random.
    pub flagged: bool,
}

impl Guess {
    pub fn bit(bit: bool) -> Self {
        Guess {
            bit,
            flagged: false,
        }
    }

    pub fn random(rng: &mut dyn RngCore) -> Self {
        Guess {
            bit: coin(rng),
            flagged: true,
        }
    }
}

/// A static-game adversary. Any per-trial memory travels in `State`.
pub trait Adversary<S: OreScheme>: Send + Sync {
    type State: Send;

    fn name(&self) -> String;

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (ChallengePair, Self::State);

    fn guess(
        &self,
        scheme: &S,
        state: Self::State,
        params: &S::Params,
        ciphertexts: &[Ciphertext],
        rng: &mut dyn RngCore,
    ) -> Guess;
}

pub trait SingleChallengeAdversary<S: OreScheme>: Send + Sync {
    type State: Send;

    fn name(&self) -> String;

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (SingleChallenge, Self::State);

    fn guess(
        &self,
        scheme: &S,
        state: Self::State,
        params: &S::Params,
        ciphertexts: &[Ciphertext],
        challenge: &Ciphertext,
        rng: &mut dyn RngCore,
    ) -> Guess;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSettings {
    pub lambda: u32,
    pub ell: u8,
    pub trials: usize,
    pub seed: u64,
    /// Keep params and ciphertexts in each transcript.
    pub full_transcripts: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub trial: u64,
    pub seed: String,
    pub b: bool,
    pub guess: bool,
    pub win: bool,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ciphertexts: Option<Vec<Ciphertext>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub game: String,
    pub scheme: String,
    pub adversary: String,
    pub ell: u8,
    pub trials: usize,
    pub advantage: Advantage,
    pub flagged: usize,
    /// Advantage over the trials where the adversary did not give up.
    pub unflagged: Advantage,
    pub transcripts: Vec<GameTranscript>,
}

fn summarize(
    game: &str,
    scheme: String,
    adversary: String,
    settings: &GameSettings,
    transcripts: Vec<GameTranscript>,
) -> GameReport {
    let tally = |keep: &dyn Fn(&GameTranscript) -> bool| {
        let (mut n0, mut o0, mut n1, mut o1) = (0, 0, 0, 0);
        for t in transcripts.iter().filter(|t| keep(t)) {
            if t.b {
                n1 += 1;
                o1 += t.guess as usize;
            } else {
                n0 += 1;
                o0 += t.guess as usize;
            }
        }
        Advantage::from_counts(n0, o0, n1, o1)
    };
    GameReport {
        game: game.into(),
        scheme,
        adversary,
        ell: settings.ell,
        trials: settings.trials,
        advantage: tally(&|_| true),
        flagged: transcripts.iter().filter(|t| t.flagged).count(),
        unflagged: tally(&|t| !t.flagged),
        transcripts,
    }
}

fn check_settings(settings: &GameSettings) -> Result<()> {
    if settings.trials == 0 {
        return Err(Error::usage("a game needs at least one trial"));
    }
    Ok(())
}

fn transcript<S: OreScheme>(
    settings: &GameSettings,
    trial: u64,
    b: bool,
    guess: Guess,
    params: &S::Params,
    ciphertexts: Vec<Ciphertext>,
) -> GameTranscript {
    let full = settings.full_transcripts;
    GameTranscript {
        trial,
        seed: hex::encode(trial_seed(settings.seed, trial)),
        b,
        guess: guess.bit,
        win: guess.bit == b,
        flagged: guess.flagged,
        params: full.then(|| hex::encode(params.to_bytes())),
        ciphertexts: full.then_some(ciphertexts),
    }
}

fn encrypt_all<S: OreScheme>(
    scheme: &S,
    sk: &S::SecretKey,
    ell: u8,
    values: &[u64],
    rng: &mut dyn RngCore,
) -> Vec<Ciphertext> {
    values
        .iter()
        .map(|&v| scheme.enc(sk, Message::new(v, ell).expect("validated"), rng))
        .collect()
}

/// Runs the static game; trial `i` draws everything from its own stream.
pub fn run_static_game<S, A>(
    scheme: &S,
    adversary: &A,
    settings: &GameSettings,
) -> Result<GameReport>
where
    S: OreScheme,
    A: Adversary<S>,
{
    check_settings(settings)?;
    let transcripts = (0..settings.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_trial_rng(settings.seed, trial);
            let (pair, state) = adversary.choose_challenge(settings.ell, &mut rng);
            pair.validate(settings.ell)?;
            let b = coin(&mut rng);
            let (sk, params) = scheme.gen(settings.lambda, settings.ell, &mut rng)?;
            let cts = encrypt_all(scheme, &sk, settings.ell, pair.side(b), &mut rng);
            let guess = adversary.guess(scheme, state, &params, &cts, &mut rng);
            Ok(transcript::<S>(settings, trial, b, guess, &params, cts))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(
        "static",
        scheme.name(),
        adversary.name(),
        settings,
        transcripts,
    ))
}

pub fn run_single_challenge_game<S, A>(
    scheme: &S,
    adversary: &A,
    settings: &GameSettings,
) -> Result<GameReport>
where
    S: OreScheme,
    A: SingleChallengeAdversary<S>,
{
    check_settings(settings)?;
    let ell = settings.ell;
    let transcripts = (0..settings.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_trial_rng(settings.seed, trial);
            let (challenge, state) = adversary.choose_challenge(ell, &mut rng);
            challenge.validate(ell)?;
            let b = coin(&mut rng);
            let (sk, params) = scheme.gen(settings.lambda, ell, &mut rng)?;
            let mut cts = encrypt_all(scheme, &sk, ell, &challenge.messages, &mut rng);
            let star = Message::new(challenge.challenge(b), ell).expect("validated");
            let c_star = scheme.enc(&sk, star, &mut rng);
            let guess = adversary.guess(scheme, state, &params, &cts, &c_star, &mut rng);
            cts.push(c_star);
            Ok(transcript::<S>(settings, trial, b, guess, &params, cts))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(
        "single_challenge",
        scheme.name(),
        adversary.name(),
        settings,
        transcripts,
    ))
}
