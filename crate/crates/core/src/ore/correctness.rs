//! Executable correctness checkers: decryption, weak comparison and strong
//! comparison correctness, plus the ciphertext fuzz sampler.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{
    comp_ciph, comp_plain, domain_size, Ciphertext, CompareResult, KeyMaterial, Message, OreScheme,
};
use crate::error::{Error, Result};
use crate::rng::{fresh_seed, uniform_below, uniform_in};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationClass {
    Valid,
    BitFlip,
    Truncate,
    Random,
    /// Supplied by the caller rather than drawn by the sampler.
    Crafted,
}

impl MutationClass {
    pub const SAMPLED: [MutationClass; 4] = [
        MutationClass::Valid,
        MutationClass::BitFlip,
        MutationClass::Truncate,
        MutationClass::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationClass::Valid => "valid",
            MutationClass::BitFlip => "bit_flip",
            MutationClass::Truncate => "truncate",
            MutationClass::Random => "random",
            MutationClass::Crafted => "crafted",
        }
    }
}

/// Draws ciphertexts from four classes: fresh encryptions of uniform
/// messages, the same with one bit flipped, the same truncated to a shorter
/// length, and uniformly random byte strings of length up to twice an honest
/// ciphertext.
#[derive(Clone, Debug)]
pub struct FuzzSampler {
    weights: [f64; 4],
}

impl Default for FuzzSampler {
    fn default() -> Self {
        FuzzSampler { weights: [0.25; 4] }
    }
}

impl FuzzSampler {
    /// Weights for (valid, bit flip, truncate, random); need not be normalized.
    pub fn with_weights(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::usage(format!(
                "invalid mutation weights {weights:?}"
            )));
        }
        Ok(FuzzSampler { weights })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    fn pick_class(&self, rng: &mut dyn RngCore) -> MutationClass {
        let total: f64 = self.weights.iter().sum();
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * total;
        let mut acc = 0.0;
        for (w, class) in self.weights.iter().zip(MutationClass::SAMPLED) {
            acc += w;
            if u < acc {
                return class;
            }
        }
        // Rounding fallthrough: last class with positive weight.
        MutationClass::SAMPLED
            .into_iter()
            .zip(self.weights)
            .rev()
            .find(|(_, w)| *w > 0.0)
            .map(|(c, _)| c)
            .unwrap_or(MutationClass::Valid)
    }

    pub fn sample<S: OreScheme>(
        &self,
        scheme: &S,
        sk: &S::SecretKey,
        ell: u8,
        rng: &mut dyn RngCore,
    ) -> (MutationClass, Ciphertext) {
        let class = self.pick_class(rng);
        let c = self.sample_class(class, scheme, sk, ell, rng);
        (class, c)
    }

    pub fn sample_class<S: OreScheme>(
        &self,
        class: MutationClass,
        scheme: &S,
        sk: &S::SecretKey,
        ell: u8,
        rng: &mut dyn RngCore,
    ) -> Ciphertext {
        let m = random_message(ell, rng);
        let honest = scheme.enc(sk, m, rng);
        match class {
            MutationClass::Valid | MutationClass::Crafted => honest,
            MutationClass::BitFlip => {
                let mut bytes = honest.into_bytes();
                if bytes.is_empty() {
                    return Ciphertext::from_bytes(vec![0x80]);
                }
                let bit = uniform_in(rng, 0, bytes.len() as u64 * 8);
                bytes[(bit / 8) as usize] ^= 1 << (bit % 8);
                Ciphertext::from_bytes(bytes)
            }
            MutationClass::Truncate => {
                let mut bytes = honest.into_bytes();
                let keep = if bytes.is_empty() {
                    0
                } else {
                    uniform_in(rng, 0, bytes.len() as u64)
                };
                bytes.truncate(keep as usize);
                Ciphertext::from_bytes(bytes)
            }
            MutationClass::Random => {
                let len = uniform_in(rng, 0, 2 * honest.len() as u64 + 1) as usize;
                let mut bytes = vec![0u8; len];
                rng.fill_bytes(&mut bytes);
                Ciphertext::from_bytes(bytes)
            }
        }
    }
}

pub(crate) fn random_message(ell: u8, rng: &mut dyn RngCore) -> Message {
    let v = uniform_below(rng, domain_size(ell));
    Message::new(v, ell).expect("sampled inside the domain")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecryptionFailure {
    pub message: u64,
    /// Hex of the key-generation coins.
    pub key_coins: String,
    pub decrypted: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecryptionReport {
    pub checked: usize,
    pub failures: Vec<DecryptionFailure>,
}

impl DecryptionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Encrypts and decrypts every message in `messages` under `keys` freshly
/// generated keys and records each round trip that does not return the input.
pub fn check_decryption_correctness<S: OreScheme>(
    scheme: &S,
    lambda: u32,
    ell: u8,
    messages: &[u64],
    keys: usize,
    rng: &mut dyn RngCore,
) -> Result<DecryptionReport> {
    let msgs = messages
        .iter()
        .map(|&v| Message::new(v, ell))
        .collect::<Result<Vec<_>>>()?;
    let mut report = DecryptionReport::default();
    for _ in 0..keys {
        let km = KeyMaterial::generate(scheme, lambda, ell, fresh_seed(rng))?;
        for &m in &msgs {
            let c = scheme.enc(&km.sk, m, rng);
            let d = scheme.dec(&km.sk, &c);
            report.checked += 1;
            if d != Some(m) {
                report.failures.push(DecryptionFailure {
                    message: m.value(),
                    key_coins: hex::encode(km.coins),
                    decrypted: d.map(Message::value),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakMismatch {
    pub m0: u64,
    pub m1: u64,
    pub expected: CompareResult,
    pub got: CompareResult,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakReport {
    pub checked: usize,
    pub mismatches: Vec<WeakMismatch>,
}

impl WeakReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks `Comp(params, Enc(m0), Enc(m1)) = Comp_plain(m0, m1)` for each pair
/// under one freshly generated key.
pub fn check_weak_correctness<S: OreScheme>(
    scheme: &S,
    lambda: u32,
    ell: u8,
    pairs: &[(u64, u64)],
    rng: &mut dyn RngCore,
) -> Result<WeakReport> {
    let km = KeyMaterial::generate(scheme, lambda, ell, fresh_seed(rng))?;
    check_weak_with_key(scheme, &km, pairs, rng)
}

pub fn check_weak_with_key<S: OreScheme>(
    scheme: &S,
    km: &KeyMaterial<S>,
    pairs: &[(u64, u64)],
    rng: &mut dyn RngCore,
) -> Result<WeakReport> {
    let ell = km.ell();
    let mut report = WeakReport::default();
    for &(a, b) in pairs {
        let (m0, m1) = (Message::new(a, ell)?, Message::new(b, ell)?);
        let c0 = scheme.enc(&km.sk, m0, rng);
        let c1 = scheme.enc(&km.sk, m1, rng);
        let expected = CompareResult::from(comp_plain(m0, m1)?);
        let got = scheme.comp(&km.params, &c0, &c1);
        report.checked += 1;
        if got != expected {
            report.mismatches.push(WeakMismatch {
                m0: a,
                m1: b,
                expected,
                got,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub pairs: usize,
    pub mismatches: usize,
}

/// One compared pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongRow {
    pub index: usize,
    pub class0: MutationClass,
    pub class1: MutationClass,
    pub comp: CompareResult,
    pub comp_ciph: CompareResult,
}

impl StrongRow {
    pub fn agrees(&self) -> bool {
        self.comp == self.comp_ciph
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongMismatch {
    pub index: usize,
    pub class0: MutationClass,
    pub class1: MutationClass,
    pub c0: Ciphertext,
    pub c1: Ciphertext,
    pub comp: CompareResult,
    pub comp_ciph: CompareResult,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongReport {
    pub pairs: usize,
    pub mismatches: usize,
    /// Keyed by `"class0/class1"`.
    pub by_class: BTreeMap<String, ClassTally>,
    pub rows: Vec<StrongRow>,
    /// The first few offending pairs, in full.
    pub witnesses: Vec<StrongMismatch>,
}

const MAX_WITNESSES: usize = 8;

impl StrongReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }

    fn record<S: OreScheme>(
        &mut self,
        scheme: &S,
        km: &KeyMaterial<S>,
        classes: (MutationClass, MutationClass),
        c0: &Ciphertext,
        c1: &Ciphertext,
    ) {
        let comp = scheme.comp(&km.params, c0, c1);
        let reference = comp_ciph(scheme, &km.sk, c0, c1);
        let index = self.pairs;
        self.pairs += 1;
        let tally = self
            .by_class
            .entry(format!("{}/{}", classes.0.as_str(), classes.1.as_str()))
            .or_default();
        tally.pairs += 1;
        if comp != reference {
            tally.mismatches += 1;
            self.mismatches += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(StrongMismatch {
                    index,
                    class0: classes.0,
                    class1: classes.1,
                    c0: c0.clone(),
                    c1: c1.clone(),
                    comp,
                    comp_ciph: reference,
                });
            }
        }
        self.rows.push(StrongRow {
            index,
            class0: classes.0,
            class1: classes.1,
            comp,
            comp_ciph: reference,
        });
    }
}

/// Draws `trials` ciphertext pairs from `sampler` under one fresh key and
/// checks `Comp(params, c0, c1) = Comp_ciph(sk, c0, c1)` on each, ⊥ included.
pub fn check_strong_correctness<S: OreScheme>(
    scheme: &S,
    lambda: u32,
    ell: u8,
    sampler: &FuzzSampler,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<StrongReport> {
    let km = KeyMaterial::generate(scheme, lambda, ell, fresh_seed(rng))?;
    Ok(check_strong_with_key(scheme, &km, sampler, trials, rng))
}

pub fn check_strong_with_key<S: OreScheme>(
    scheme: &S,
    km: &KeyMaterial<S>,
    sampler: &FuzzSampler,
    trials: usize,
    rng: &mut dyn RngCore,
) -> StrongReport {
    let mut report = StrongReport::default();
    for _ in 0..trials {
        let (k0, c0) = sampler.sample(scheme, &km.sk, km.ell(), rng);
        let (k1, c1) = sampler.sample(scheme, &km.sk, km.ell(), rng);
        report.record(scheme, km, (k0, k1), &c0, &c1);
    }
    report
}

/// Strong-correctness check over caller-supplied pairs.
pub fn check_strong_on_pairs<S: OreScheme>(
    scheme: &S,
    km: &KeyMaterial<S>,
    pairs: &[(Ciphertext, Ciphertext)],
) -> StrongReport {
    let mut report = StrongReport::default();
    for (c0, c1) in pairs {
        report.record(
            scheme,
            km,
            (MutationClass::Crafted, MutationClass::Crafted),
            c0,
            c1,
        );
    }
    report
}
