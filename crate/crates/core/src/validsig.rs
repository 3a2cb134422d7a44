//! Valid-signature concepts: `f_{vk,m,σ}(vk′, m′, σ′) = 1` iff `vk′ = vk` and
//! `σ′` verifies on `m′` under `vk`. Includes the first-positive
//! representation learner, the reidentification pair `gen_ex` / `trace_ex`,
//! and the weak-forgery game built from a learner.

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::put;
use crate::enc_thresh::required_sample_size;
use crate::error::{Error, Result};
use crate::rng::{bernoulli, derive_trial_rng, uniform_below};
use crate::signature::SignatureScheme;
use crate::stats::Proportion;

/// Bytes holding an `ell`-bit message.
pub fn message_len(ell: u16) -> usize {
    (ell as usize).div_ceil(8)
}

/// Uniform `ell`-bit message, big-endian with the unused high bits zero.
pub fn random_message(ell: u16, rng: &mut dyn RngCore) -> Vec<u8> {
    let mut m = vec![0u8; message_len(ell)];
    rng.fill_bytes(&mut m);
    let spare = m.len() * 8 - ell as usize;
    if let Some(first) = m.first_mut() {
        *first &= 0xff >> spare;
    }
    m
}

fn in_domain(ell: u16, m: &[u8]) -> bool {
    m.len() == message_len(ell)
        && m.first()
            .is_none_or(|b| b.leading_zeros() as usize >= m.len() * 8 - ell as usize)
}

/// A point `(vk, m, σ)`.
pub struct SignedPoint<G: SignatureScheme> {
    pub vk: G::VerifyingKey,
    pub m: Vec<u8>,
    pub sig: Vec<u8>,
}

impl<G: SignatureScheme> Clone for SignedPoint<G> {
    fn clone(&self) -> Self {
        SignedPoint {
            vk: self.vk.clone(),
            m: self.m.clone(),
            sig: self.sig.clone(),
        }
    }
}

impl<G: SignatureScheme> fmt::Debug for SignedPoint<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SignedPoint(m={}, sig={})",
            hex::encode(&self.m),
            hex::encode(&self.sig)
        )
    }
}

impl<G: SignatureScheme> SignedPoint<G> {
    /// `len ‖ vk ‖ len ‖ m ‖ len ‖ σ`; tracing compares these bytes.
    pub fn canonical(&self, scheme: &G) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, &scheme.verifying_key_bytes(&self.vk));
        put(&mut out, &self.m);
        put(&mut out, &self.sig);
        out
    }

    pub fn signed(
        scheme: &G,
        sk: &G::SigningKey,
        vk: &G::VerifyingKey,
        m: Vec<u8>,
        rng: &mut dyn RngCore,
    ) -> Self {
        let sig = scheme.sign(sk, &m, rng);
        SignedPoint {
            vk: vk.clone(),
            m,
            sig,
        }
    }
}

pub struct LabeledPoint<G: SignatureScheme> {
    pub point: SignedPoint<G>,
    pub label: bool,
}

impl<G: SignatureScheme> Clone for LabeledPoint<G> {
    fn clone(&self) -> Self {
        LabeledPoint {
            point: self.point.clone(),
            label: self.label,
        }
    }
}

/// The target concept, represented by a verifying key and one valid anchor.
pub struct ValidSigConcept<G: SignatureScheme> {
    pub ell: u16,
    pub anchor: SignedPoint<G>,
}

impl<G: SignatureScheme> ValidSigConcept<G> {
    pub fn new(scheme: &G, ell: u16, anchor: SignedPoint<G>) -> Result<Self> {
        if !in_domain(ell, &anchor.m) || !scheme.verify(&anchor.vk, &anchor.m, &anchor.sig) {
            return Err(Error::usage(
                "concept anchor must be a valid signature on an ℓ-bit message",
            ));
        }
        Ok(ValidSigConcept { ell, anchor })
    }

    pub fn vk(&self) -> &G::VerifyingKey {
        &self.anchor.vk
    }

    pub fn evaluate(&self, scheme: &G, x: &SignedPoint<G>) -> bool {
        evaluate_validsig(scheme, self.ell, &self.anchor.vk, x)
    }

    pub fn label(&self, scheme: &G, point: SignedPoint<G>) -> LabeledPoint<G> {
        let label = self.evaluate(scheme, &point);
        LabeledPoint { point, label }
    }
}

pub fn evaluate_validsig<G: SignatureScheme>(
    scheme: &G,
    ell: u16,
    vk: &G::VerifyingKey,
    x: &SignedPoint<G>,
) -> bool {
    x.vk == *vk && in_domain(ell, &x.m) && scheme.verify(vk, &x.m, &x.sig)
}

/// A learner's output: a triple naming a concept, or the all-zeroes function.
pub enum Representation<G: SignatureScheme> {
    Bottom,
    Triple(SignedPoint<G>),
}

impl<G: SignatureScheme> Clone for Representation<G> {
    fn clone(&self) -> Self {
        match self {
            Representation::Bottom => Representation::Bottom,
            Representation::Triple(p) => Representation::Triple(p.clone()),
        }
    }
}

impl<G: SignatureScheme> fmt::Debug for Representation<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Bottom => f.write_str("⊥"),
            Representation::Triple(p) => p.fmt(f),
        }
    }
}

impl<G: SignatureScheme> Representation<G> {
    pub fn is_bottom(&self) -> bool {
        matches!(self, Representation::Bottom)
    }

    pub fn predict(&self, scheme: &G, ell: u16, x: &SignedPoint<G>) -> bool {
        match self {
            Representation::Bottom => false,
            Representation::Triple(p) => evaluate_validsig(scheme, ell, &p.vk, x),
        }
    }
}

pub trait SigLearner<G: SignatureScheme>: Send + Sync {
    fn name(&self) -> &'static str;

    fn learn(
        &self,
        scheme: &G,
        sample: &[LabeledPoint<G>],
        rng: &mut dyn RngCore,
    ) -> Representation<G>;
}

/// Returns the first positive example's triple.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstPositive;

impl<G: SignatureScheme> SigLearner<G> for FirstPositive {
    fn name(&self) -> &'static str {
        "first_positive"
    }

    fn learn(
        &self,
        _scheme: &G,
        sample: &[LabeledPoint<G>],
        _rng: &mut dyn RngCore,
    ) -> Representation<G> {
        validsig_learn(sample)
    }
}

pub fn validsig_learn<G: SignatureScheme>(sample: &[LabeledPoint<G>]) -> Representation<G> {
    sample
        .iter()
        .find(|s| s.label)
        .map_or(Representation::Bottom, |s| {
            Representation::Triple(s.point.clone())
        })
}

/// Always outputs ⊥.
#[derive(Clone, Copy, Debug, Default)]
pub struct BottomLearner;

impl<G: SignatureScheme> SigLearner<G> for BottomLearner {
    fn name(&self) -> &'static str {
        "bottom"
    }

    fn learn(
        &self,
        _scheme: &G,
        _sample: &[LabeledPoint<G>],
        _rng: &mut dyn RngCore,
    ) -> Representation<G> {
        Representation::Bottom
    }
}

/// Negative control: signs a fresh random message with a signing key it was
/// handed.
pub struct LeakedKeySigner<G: SignatureScheme> {
    pub sk: G::SigningKey,
    pub vk: G::VerifyingKey,
    pub ell: u16,
}

impl<G: SignatureScheme> SigLearner<G> for LeakedKeySigner<G> {
    fn name(&self) -> &'static str {
        "leaked_key"
    }

    fn learn(
        &self,
        scheme: &G,
        _sample: &[LabeledPoint<G>],
        rng: &mut dyn RngCore,
    ) -> Representation<G> {
        let m = random_message(self.ell, rng);
        Representation::Triple(SignedPoint::signed(scheme, &self.sk, &self.vk, m, rng))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigDistribution {
    /// 90% valid signatures under the target key.
    PositiveHeavy,
    /// 3% valid signatures under the target key.
    NegativeHeavy,
    Mixed,
}

impl SigDistribution {
    pub const ALL: [SigDistribution; 3] = [
        SigDistribution::PositiveHeavy,
        SigDistribution::NegativeHeavy,
        SigDistribution::Mixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SigDistribution::PositiveHeavy => "positive_heavy",
            SigDistribution::NegativeHeavy => "negative_heavy",
            SigDistribution::Mixed => "mixed",
        }
    }

    pub fn positive_weight(self) -> f64 {
        match self {
            SigDistribution::PositiveHeavy => 0.9,
            SigDistribution::NegativeHeavy => 0.03,
            SigDistribution::Mixed => 0.5,
        }
    }
}

/// Keys for one distribution instance: the target pair and a few unrelated
/// signers.
pub struct SigWorld<G: SignatureScheme> {
    pub ell: u16,
    pub sk: G::SigningKey,
    pub vk: G::VerifyingKey,
    pub others: Vec<(G::SigningKey, G::VerifyingKey)>,
    pub kind: SigDistribution,
}

impl<G: SignatureScheme> SigWorld<G> {
    pub fn new(
        scheme: &G,
        lambda: u32,
        ell: u16,
        kind: SigDistribution,
        rng: &mut dyn RngCore,
    ) -> Self {
        let (sk, vk) = scheme.gen(lambda, rng);
        let others = (0..4).map(|_| scheme.gen(lambda, rng)).collect();
        SigWorld {
            ell,
            sk,
            vk,
            others,
            kind,
        }
    }

    /// Valid target signatures with the configured weight; otherwise, evenly,
    /// a valid signature under another key or a target signature with one bit
    /// flipped.
    pub fn sample(&self, scheme: &G, rng: &mut dyn RngCore) -> SignedPoint<G> {
        let m = random_message(self.ell, rng);
        if bernoulli(rng, self.kind.positive_weight()) {
            return SignedPoint::signed(scheme, &self.sk, &self.vk, m, rng);
        }
        if bernoulli(rng, 0.5) {
            let (sk, vk) = &self.others[uniform_below(rng, self.others.len() as u128) as usize];
            SignedPoint::signed(scheme, sk, vk, m, rng)
        } else {
            let mut p = SignedPoint::signed(scheme, &self.sk, &self.vk, m, rng);
            let bit = uniform_below(rng, (p.sig.len() * 8) as u128) as usize;
            p.sig[bit / 8] ^= 1 << (bit % 8);
            p
        }
    }

    pub fn concept(&self, scheme: &G, rng: &mut dyn RngCore) -> ValidSigConcept<G> {
        let anchor = SignedPoint::signed(
            scheme,
            &self.sk,
            &self.vk,
            random_message(self.ell, rng),
            rng,
        );
        ValidSigConcept {
            ell: self.ell,
            anchor,
        }
    }
}

/// State of the reidentification scheme: `x_0, …, x_n` under one key pair.
pub struct SigReidentState<G: SignatureScheme> {
    pub sk: G::SigningKey,
    pub vk: G::VerifyingKey,
    pub draws: Vec<SignedPoint<G>>,
    canonical: Vec<Vec<u8>>,
}

impl<G: SignatureScheme> SigReidentState<G> {
    pub fn n(&self) -> usize {
        self.draws.len() - 1
    }

    /// `x_1, …, x_n`, all labeled 1.
    pub fn sample(&self) -> Vec<LabeledPoint<G>> {
        self.sample_without(0)
    }

    /// The sample with `x_j` replaced by `x_0`; `j = 0` drops nothing.
    pub fn sample_without(&self, j: usize) -> Vec<LabeledPoint<G>> {
        (1..self.draws.len())
            .map(|i| LabeledPoint {
                point: self.draws[if i == j { 0 } else { i }].clone(),
                label: true,
            })
            .collect()
    }
}

pub fn validsig_gen_ex<G: SignatureScheme>(
    scheme: &G,
    lambda: u32,
    n: usize,
    ell: u16,
    rng: &mut dyn RngCore,
) -> Result<SigReidentState<G>> {
    if n == 0 || ell == 0 {
        return Err(Error::usage("reidentification needs n ≥ 1 and ℓ ≥ 1"));
    }
    let (sk, vk) = scheme.gen(lambda, rng);
    let draws: Vec<_> = (0..=n)
        .map(|_| SignedPoint::signed(scheme, &sk, &vk, random_message(ell, rng), rng))
        .collect();
    let canonical = draws.iter().map(|d| d.canonical(scheme)).collect();
    Ok(SigReidentState {
        sk,
        vk,
        draws,
        canonical,
    })
}

/// The first `i ∈ [1, n]` with `x_i` equal to the representation, byte for byte.
pub fn validsig_trace_ex<G: SignatureScheme>(
    scheme: &G,
    state: &SigReidentState<G>,
    rep: &Representation<G>,
) -> Option<usize> {
    let Representation::Triple(p) = rep else {
        return None;
    };
    let bytes = p.canonical(scheme);
    (1..state.draws.len()).find(|&i| state.canonical[i] == bytes)
}

/// Signs on request and remembers every pair it produced.
pub struct SigningOracle<'a, G: SignatureScheme> {
    scheme: &'a G,
    sk: &'a G::SigningKey,
    queried: Vec<(Vec<u8>, Vec<u8>)>,
}

impl<'a, G: SignatureScheme> SigningOracle<'a, G> {
    pub fn new(scheme: &'a G, sk: &'a G::SigningKey) -> Self {
        SigningOracle {
            scheme,
            sk,
            queried: Vec::new(),
        }
    }

    pub fn sign(&mut self, m: &[u8], rng: &mut dyn RngCore) -> Vec<u8> {
        let sig = self.scheme.sign(self.sk, m, rng);
        self.queried.push((m.to_vec(), sig.clone()));
        sig
    }

    pub fn queried(&self) -> &[(Vec<u8>, Vec<u8>)] {
        &self.queried
    }
}

/// Queries `n` random messages, hands the signed sample to the learner and
/// returns the message and signature of its representation.
pub fn forgery_adversary<G: SignatureScheme>(
    scheme: &G,
    learner: &dyn SigLearner<G>,
    n: usize,
    ell: u16,
    oracle: &mut SigningOracle<'_, G>,
    vk: &G::VerifyingKey,
    rng: &mut dyn RngCore,
) -> Option<(Vec<u8>, Vec<u8>)> {
    let sample: Vec<_> = (0..n)
        .map(|_| {
            let m = random_message(ell, rng);
            let sig = oracle.sign(&m, rng);
            LabeledPoint {
                point: SignedPoint {
                    vk: vk.clone(),
                    m,
                    sig,
                },
                label: true,
            }
        })
        .collect();
    match learner.learn(scheme, &sample, rng) {
        Representation::Bottom => None,
        Representation::Triple(p) => Some((p.m, p.sig)),
    }
}

/// 1 iff the output verifies and is not one of the queried pairs.
pub fn forgery_wins<G: SignatureScheme>(
    scheme: &G,
    vk: &G::VerifyingKey,
    queried: &[(Vec<u8>, Vec<u8>)],
    out: Option<&(Vec<u8>, Vec<u8>)>,
) -> bool {
    match out {
        None => false,
        Some((m, sig)) => {
            scheme.verify(vk, m, sig) && !queried.iter().any(|(qm, qs)| qm == m && qs == sig)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidSigSettings {
    pub lambda: u32,
    pub n: usize,
    pub ell: u16,
    pub alpha: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    pub error_samples: usize,
}

impl ValidSigSettings {
    /// `n = ⌈ln(1/β)/α⌉` unless set explicitly.
    pub fn sample_size(&self) -> Result<usize> {
        if self.n > 0 {
            Ok(self.n)
        } else {
            required_sample_size(self.alpha, self.beta)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnRow {
    pub trial: usize,
    pub distribution: SigDistribution,
    pub bottom: bool,
    pub error: f64,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub n: usize,
    pub per_distribution: Vec<(SigDistribution, Proportion)>,
    pub rows: Vec<LearnRow>,
}

/// Learner success (error ≤ α, estimated on fresh draws) per distribution.
pub fn learn_experiment<G: SignatureScheme>(
    scheme: &G,
    settings: &ValidSigSettings,
) -> Result<LearnReport> {
    let n = settings.sample_size()?;
    if settings.error_samples == 0 {
        return Err(Error::usage("error estimate needs at least one sample"));
    }
    let mut rows = Vec::new();
    let mut per_distribution = Vec::new();
    for (d, kind) in SigDistribution::ALL.into_iter().enumerate() {
        let block: Vec<LearnRow> = (0..settings.trials)
            .into_par_iter()
            .map(|trial| {
                let index = (d * settings.trials + trial) as u64;
                let mut rng = derive_trial_rng(settings.seed, index);
                let world = SigWorld::new(scheme, settings.lambda, settings.ell, kind, &mut rng);
                let concept = world.concept(scheme, &mut rng);
                let sample: Vec<_> = (0..n)
                    .map(|_| concept.label(scheme, world.sample(scheme, &mut rng)))
                    .collect();
                let rep = validsig_learn(&sample);
                let wrong = (0..settings.error_samples)
                    .filter(|_| {
                        let x = world.sample(scheme, &mut rng);
                        concept.evaluate(scheme, &x) != rep.predict(scheme, settings.ell, &x)
                    })
                    .count();
                let error = wrong as f64 / settings.error_samples as f64;
                LearnRow {
                    trial,
                    distribution: kind,
                    bottom: rep.is_bottom(),
                    error,
                    good: error <= settings.alpha,
                }
            })
            .collect();
        let good = block.iter().filter(|r| r.good).count();
        per_distribution.push((kind, Proportion::new(good, block.len())));
        rows.extend(block);
    }
    Ok(LearnReport {
        n,
        per_distribution,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigTraceRow {
    pub trial: usize,
    pub dropped: usize,
    pub bottom: bool,
    pub accused: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigTraceReport {
    pub n: usize,
    pub ell: u16,
    /// 0 when the learner saw the full sample.
    pub dropped: usize,
    pub non_bottom: usize,
    /// Non-⊥ outputs traced to some sample index.
    pub traced: usize,
    pub accused_dropped: Proportion,
    pub rows: Vec<SigTraceRow>,
}

/// Runs the first-positive learner on the sample with `x_dropped` replaced by
/// `x_0` (`dropped = 0` keeps the full sample) and traces its output.
pub fn trace_experiment<G: SignatureScheme>(
    scheme: &G,
    settings: &ValidSigSettings,
    dropped: usize,
) -> Result<SigTraceReport> {
    let n = settings.sample_size()?;
    if dropped > n {
        return Err(Error::usage(format!(
            "dropped index {dropped} outside [0, {n}]"
        )));
    }
    let rows = (0..settings.trials)
        .into_par_iter()
        .map(|trial| -> Result<SigTraceRow> {
            let mut rng = derive_trial_rng(settings.seed, trial as u64);
            let state = validsig_gen_ex(scheme, settings.lambda, n, settings.ell, &mut rng)?;
            let rep = validsig_learn(&state.sample_without(dropped));
            Ok(SigTraceRow {
                trial,
                dropped,
                bottom: rep.is_bottom(),
                accused: validsig_trace_ex(scheme, &state, &rep),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_bottom = rows.iter().filter(|r| !r.bottom).count();
    let traced = rows
        .iter()
        .filter(|r| !r.bottom && r.accused.is_some())
        .count();
    let hits = if dropped == 0 {
        0
    } else {
        rows.iter().filter(|r| r.accused == Some(dropped)).count()
    };
    Ok(SigTraceReport {
        n,
        ell: settings.ell,
        dropped,
        non_bottom,
        traced,
        accused_dropped: Proportion::new(hits, rows.len()),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgeryReport {
    pub learner: String,
    pub trials: usize,
    pub attempts: usize,
    pub wins: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeryLearner {
    Honest,
    Bottom,
    LeakedKey,
}

impl ForgeryLearner {
    pub const ALL: [ForgeryLearner; 3] = [
        ForgeryLearner::Honest,
        ForgeryLearner::Bottom,
        ForgeryLearner::LeakedKey,
    ];
}

/// The weak-forgery game with the adversary wrapped around the chosen learner.
pub fn forgery_experiment<G: SignatureScheme>(
    scheme: &G,
    settings: &ValidSigSettings,
    which: ForgeryLearner,
) -> Result<ForgeryReport> {
    let n = settings.sample_size()?;
    let outcomes: Vec<(bool, bool)> = (0..settings.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_trial_rng(settings.seed, trial as u64);
            let (sk, vk) = scheme.gen(settings.lambda, &mut rng);
            let leaked;
            let learner: &dyn SigLearner<G> = match which {
                ForgeryLearner::Honest => &FirstPositive,
                ForgeryLearner::Bottom => &BottomLearner,
                ForgeryLearner::LeakedKey => {
                    leaked = LeakedKeySigner {
                        sk: sk.clone(),
                        vk: vk.clone(),
                        ell: settings.ell,
                    };
                    &leaked
                }
            };
            let mut oracle = SigningOracle::new(scheme, &sk);
            let out =
                forgery_adversary(scheme, learner, n, settings.ell, &mut oracle, &vk, &mut rng);
            (
                out.is_some(),
                forgery_wins(scheme, &vk, oracle.queried(), out.as_ref()),
            )
        })
        .collect();
    let attempts = outcomes.iter().filter(|o| o.0).count();
    let wins = outcomes.iter().filter(|o| o.1).count();
    Ok(ForgeryReport {
        learner: match which {
            ForgeryLearner::Honest => "first_positive",
            ForgeryLearner::Bottom => "bottom",
            ForgeryLearner::LeakedKey => "leaked_key",
        }
        .into(),
        trials: settings.trials,
        attempts,
        wins,
        value: if settings.trials == 0 {
            0.0
        } else {
            wins as f64 / settings.trials as f64
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendReport {
    pub round_trips: usize,
    pub round_trip_failures: usize,
    pub flipped: usize,
    pub flipped_accepted: usize,
}

impl BackendReport {
    pub fn passed(&self) -> bool {
        self.round_trip_failures == 0 && self.flipped_accepted == 0
    }
}

/// Sign/verify round trips on random messages, then the same signatures with
/// one random bit flipped.
pub fn backend_check<G: SignatureScheme>(
    scheme: &G,
    lambda: u32,
    ell: u16,
    count: usize,
    rng: &mut dyn RngCore,
) -> BackendReport {
    let (sk, vk) = scheme.gen(lambda, rng);
    let mut report = BackendReport {
        round_trips: count,
        round_trip_failures: 0,
        flipped: count,
        flipped_accepted: 0,
    };
    for _ in 0..count {
        let m = random_message(ell, rng);
        let mut sig = scheme.sign(&sk, &m, rng);
        if !scheme.verify(&vk, &m, &sig) {
            report.round_trip_failures += 1;
        }
        let bit = uniform_below(rng, (sig.len() * 8) as u128) as usize;
        sig[bit / 8] ^= 1 << (bit % 8);
        if scheme.verify(&vk, &m, &sig) {
            report.flipped_accepted += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::signature::Ed25519;

    #[test]
    fn messages_stay_in_domain() {
        let mut rng = rng_from_seed([1; 32]);
        for ell in [1u16, 7, 8, 9, 64] {
            for _ in 0..50 {
                let m = random_message(ell, &mut rng);
                assert!(in_domain(ell, &m));
            }
        }
        assert!(!in_domain(7, &[0x80]));
        assert!(!in_domain(8, &[0, 0]));
    }

    #[test]
    fn evaluate_cases() {
        let mut rng = rng_from_seed([2; 32]);
        let world = SigWorld::new(&Ed25519, 128, 32, SigDistribution::Mixed, &mut rng);
        let concept = world.concept(&Ed25519, &mut rng);
        let good = SignedPoint::signed(
            &Ed25519,
            &world.sk,
            &world.vk,
            random_message(32, &mut rng),
            &mut rng,
        );
        assert!(concept.evaluate(&Ed25519, &good));
        let (osk, ovk) = &world.others[0];
        let other = SignedPoint::signed(&Ed25519, osk, ovk, good.m.clone(), &mut rng);
        assert!(!concept.evaluate(&Ed25519, &other));
        let mut bad = good.clone();
        bad.sig[3] ^= 1;
        assert!(!concept.evaluate(&Ed25519, &bad));
    }

    #[test]
    fn trace_finds_sample_elements() {
        let mut rng = rng_from_seed([3; 32]);
        let state = validsig_gen_ex(&Ed25519, 128, 5, 64, &mut rng).unwrap();
        for j in 1..=5 {
            let rep = Representation::Triple(state.draws[j].clone());
            assert_eq!(validsig_trace_ex(&Ed25519, &state, &rep), Some(j));
        }
        assert_eq!(
            validsig_trace_ex(&Ed25519, &state, &Representation::Bottom),
            None
        );
        let fresh = SignedPoint::signed(
            &Ed25519,
            &state.sk,
            &state.vk,
            random_message(64, &mut rng),
            &mut rng,
        );
        assert_eq!(
            validsig_trace_ex(&Ed25519, &state, &Representation::Triple(fresh)),
            None
        );
    }
}
