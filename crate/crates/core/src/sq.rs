//! Statistical-query access to an encrypted-threshold concept and the
//! query-light learner that recovers the parameters bit by bit, finds a key
//! for them and binary-searches the threshold.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::Encodable;
use crate::enc_thresh::{exact_error, Classifier, EncThreshConcept, Example, FiniteDistribution};
use crate::error::{Error, Result};
use crate::ore::correctness::FuzzSampler;
use crate::ore::{domain_size, Ciphertext, KeyMaterial, Message, OreScheme, PlaintextLen};
use crate::rng::{derive_trial_rng, fresh_seed, rng_from_seed, uniform_below, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerMode {
    Exact,
    /// Exact value plus noise uniform in `[−τ, τ]`, clamped to `[0, 1]`.
    Jitter,
}

/// `1/(64·k·⌈1/α⌉)` with the plaintext length standing in for `k`.
pub fn tau_floor(ell: u8, alpha: f64) -> f64 {
    1.0 / (64.0 * ell.max(1) as f64 * (1.0 / alpha).ceil())
}

/// What a query predicate sees of one labeled example.
pub struct QueryPoint<'a, S: OreScheme> {
    pub params: &'a S::Params,
    /// `params.to_bytes()`, computed once per distinct parameter value.
    pub params_bytes: &'a [u8],
    pub c: &'a Ciphertext,
    pub label: bool,
}

struct Atom {
    example_ix: usize,
    params_ix: usize,
    weight: f64,
    label: bool,
}

/// `STAT(c, D)` for a finitely supported `D`. Expectations are exact sums over
/// the support.
pub struct StatOracle<'a, S: OreScheme> {
    dist: &'a FiniteDistribution<S>,
    atoms: Vec<Atom>,
    params: Vec<Vec<u8>>,
    ell: u8,
    mode: AnswerMode,
    floor: f64,
    rng: ChaCha20Rng,
    queries: usize,
}

impl<'a, S: OreScheme> StatOracle<'a, S> {
    pub fn new(
        scheme: &S,
        concept: &EncThreshConcept<S>,
        dist: &'a FiniteDistribution<S>,
        mode: AnswerMode,
        alpha: f64,
        noise: Seed,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::usage(format!("need 0 < α < 1, got {alpha}")));
        }
        let mut seen: Vec<&Arc<S::Params>> = Vec::new();
        let mut params = Vec::new();
        let mut atoms = Vec::with_capacity(dist.atoms().len());
        for (i, (x, w)) in dist.atoms().iter().enumerate() {
            let params_ix = match seen
                .iter()
                .position(|p| Arc::ptr_eq(p, &x.params) || ***p == *x.params)
            {
                Some(j) => j,
                None => {
                    seen.push(&x.params);
                    params.push(x.params.to_bytes());
                    params.len() - 1
                }
            };
            atoms.push(Atom {
                example_ix: i,
                params_ix,
                weight: *w,
                label: concept.evaluate(scheme, x),
            });
        }
        Ok(StatOracle {
            dist,
            atoms,
            params,
            ell: concept.ell(),
            mode,
            floor: tau_floor(concept.ell(), alpha),
            rng: rng_from_seed(noise),
            queries: 0,
        })
    }

    pub fn ell(&self) -> u8 {
        self.ell
    }

    pub fn tau_floor(&self) -> f64 {
        self.floor
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn mode(&self) -> AnswerMode {
        self.mode
    }

    /// `Pr[ψ(x, c(x)) = 1]` over the support, no noise, not counted.
    pub fn expectation(&self, psi: impl Fn(&QueryPoint<'_, S>) -> bool) -> f64 {
        let atoms = self.dist.atoms();
        self.atoms
            .iter()
            .filter(|a| {
                let x: &Example<S> = &atoms[a.example_ix].0;
                psi(&QueryPoint {
                    params: &x.params,
                    params_bytes: &self.params[a.params_ix],
                    c: &x.c,
                    label: a.label,
                })
            })
            .map(|a| a.weight)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn stat_query(
        &mut self,
        psi: impl Fn(&QueryPoint<'_, S>) -> bool,
        tau: f64,
    ) -> Result<f64> {
        if !(tau >= self.floor) {
            return Err(Error::usage(format!(
                "tolerance {tau} below the floor {}",
                self.floor
            )));
        }
        self.queries += 1;
        let v = self.expectation(psi);
        Ok(match self.mode {
            AnswerMode::Exact => v,
            AnswerMode::Jitter => (v + self.rng.gen_range(-tau..=tau)).clamp(0.0, 1.0),
        })
    }
}

/// Finds a secret key consistent with given parameters.
pub trait KeyRecovery<S: OreScheme>: Send + Sync {
    fn name(&self) -> &'static str;

    fn recover(&self, scheme: &S, params: &S::Params) -> Result<S::SecretKey>;
}

/// Looks the parameters up among keys generated elsewhere.
pub struct KnownKeys<S: OreScheme> {
    keys: Vec<Arc<KeyMaterial<S>>>,
}

impl<S: OreScheme> KnownKeys<S> {
    pub fn new(keys: Vec<Arc<KeyMaterial<S>>>) -> Self {
        KnownKeys { keys }
    }
}

impl<S: OreScheme> KeyRecovery<S> for KnownKeys<S> {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn recover(&self, _scheme: &S, params: &S::Params) -> Result<S::SecretKey> {
        self.keys
            .iter()
            .find(|k| k.params == *params)
            .map(|k| k.sk.clone())
            .ok_or_else(|| Error::KeyRecovery("no known key has these parameters".into()))
    }
}

/// Key-generation coins number `index` of the tiny keyspace.
pub fn tiny_coins(index: u32) -> Seed {
    let mut h = Sha256::new();
    h.update(b"tiny-coins");
    h.update(index.to_le_bytes());
    h.finalize().into()
}

pub const MAX_TINY_BITS: u32 = 16;

/// Exhaustive search over the `2^bits` coin strings `tiny_coins(0..2^bits)`.
#[derive(Clone, Copy, Debug)]
pub struct TinyCoinSearch {
    pub lambda: u32,
    pub ell: u8,
    pub bits: u32,
}

impl TinyCoinSearch {
    pub fn new(lambda: u32, ell: u8, bits: u32) -> Result<Self> {
        if bits > MAX_TINY_BITS {
            return Err(Error::usage(format!(
                "tiny keyspace is at most 2^{MAX_TINY_BITS} coins"
            )));
        }
        Ok(TinyCoinSearch { lambda, ell, bits })
    }

    pub fn size(&self) -> u32 {
        1 << self.bits
    }
}

impl<S: OreScheme> KeyRecovery<S> for TinyCoinSearch {
    fn name(&self) -> &'static str {
        "tiny"
    }

    fn recover(&self, scheme: &S, params: &S::Params) -> Result<S::SecretKey> {
        let hit = (0..self.size()).into_par_iter().find_map_first(|i| {
            let km = KeyMaterial::generate(scheme, self.lambda, self.ell, tiny_coins(i)).ok()?;
            (km.params == *params).then_some(km.sk)
        });
        hit.ok_or_else(|| Error::KeyRecovery(format!("no coin among 2^{} matches", self.bits)))
    }
}

/// `h_t(params, c) = 1` iff `params` match, `c` decrypts and the plaintext is below `t`.
pub enum SqHypothesis<S: OreScheme> {
    AllZeroes,
    Threshold {
        params: Arc<S::Params>,
        sk: S::SecretKey,
        t: u128,
    },
}

impl<S: OreScheme> SqHypothesis<S> {
    pub fn threshold(&self) -> Option<u128> {
        match self {
            SqHypothesis::AllZeroes => None,
            SqHypothesis::Threshold { t, .. } => Some(*t),
        }
    }

    pub fn with_threshold(&self, t: u128) -> Self {
        match self {
            SqHypothesis::AllZeroes => SqHypothesis::AllZeroes,
            SqHypothesis::Threshold { params, sk, .. } => SqHypothesis::Threshold {
                params: params.clone(),
                sk: sk.clone(),
                t,
            },
        }
    }
}

impl<S: OreScheme> fmt::Debug for SqHypothesis<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SqHypothesis::AllZeroes => f.write_str("AllZeroes"),
            SqHypothesis::Threshold { t, .. } => write!(f, "Threshold({t})"),
        }
    }
}

impl<S: OreScheme> Classifier<S> for SqHypothesis<S> {
    fn predict(&self, scheme: &S, params: &S::Params, c: &Ciphertext) -> bool {
        match self {
            SqHypothesis::AllZeroes => false,
            SqHypothesis::Threshold { params: p, sk, t } => {
                **p == *params && scheme.dec(sk, c).is_some_and(|m| (m.value() as u128) < *t)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub lo: u128,
    pub hi: u128,
    pub t: u128,
    pub answer: f64,
}

#[derive(Debug)]
pub struct SqOutcome<S: OreScheme> {
    pub hypothesis: SqHypothesis<S>,
    /// Answer to the label query.
    pub positive_mass: f64,
    pub queries: usize,
    pub param_bits: usize,
    pub steps: Vec<SearchStep>,
}

/// Queries: one for the positive mass, one per parameter bit, at most `ℓ`
/// for the threshold.
pub fn sq_learn<S: OreScheme>(
    scheme: &S,
    oracle: &mut StatOracle<'_, S>,
    alpha: f64,
    recovery: &dyn KeyRecovery<S>,
) -> Result<SqOutcome<S>> {
    let ell = oracle.ell();
    let start = oracle.queries();
    let v = oracle.stat_query(|x| x.label, alpha / 4.0)?;
    let param_bits = scheme.params_len(ell) * 8;
    if v < alpha / 2.0 {
        return Ok(SqOutcome {
            hypothesis: SqHypothesis::AllZeroes,
            positive_mass: v,
            queries: oracle.queries() - start,
            param_bits,
            steps: Vec::new(),
        });
    }

    let mut bytes = vec![0u8; param_bits / 8];
    for i in 0..param_bits {
        let (byte, bit) = (i / 8, 7 - i % 8);
        let ans = oracle.stat_query(
            |x| {
                x.label
                    && x.params_bytes
                        .get(byte)
                        .is_some_and(|b| (b >> bit) & 1 == 1)
            },
            alpha / 16.0,
        )?;
        if ans > alpha / 8.0 {
            bytes[byte] |= 1 << bit;
        }
    }
    let params = S::Params::from_bytes(&bytes)
        .ok_or_else(|| Error::KeyRecovery("recovered parameter bits do not decode".into()))?;
    let sk = recovery.recover(scheme, &params)?;
    let params = Arc::new(params);

    // Candidates for a threshold whose mass matches `v` lie in [lo, hi].
    let (mut lo, mut hi) = (0u128, domain_size(ell));
    let mut steps = Vec::new();
    let t = loop {
        if lo == hi {
            break lo;
        }
        if lo > hi || steps.len() >= ell as usize {
            return Err(Error::usage(
                "oracle answers inconsistent with any threshold",
            ));
        }
        let t = lo + (hi - lo) / 2;
        let ans = oracle.stat_query(
            |x| {
                *x.params == *params
                    && scheme
                        .dec(&sk, x.c)
                        .is_some_and(|m| (m.value() as u128) < t)
            },
            alpha / 4.0,
        )?;
        steps.push(SearchStep {
            lo,
            hi,
            t,
            answer: ans,
        });
        if (ans - v).abs() <= alpha / 2.0 {
            break t;
        }
        if ans < v {
            lo = t + 1;
        } else {
            hi = t
                .checked_sub(1)
                .ok_or_else(|| Error::usage("oracle answers inconsistent with any threshold"))?;
        }
    };
    Ok(SqOutcome {
        hypothesis: SqHypothesis::Threshold { params, sk, t },
        positive_mass: v,
        queries: oracle.queries() - start,
        param_bits,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMismatch {
    pub ciphertext: Ciphertext,
    pub first: Option<u64>,
    pub second: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub checked: usize,
    pub mismatch_count: usize,
    /// The first few mismatches.
    pub mismatches: Vec<KeyMismatch>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.mismatch_count == 0
    }
}

pub const MAX_EQUIVALENCE_ELL: u8 = 12;

/// Decrypts, under both keys, every encryption of the domain under either key
/// plus `fuzz` sampled ciphertexts per key, and lists disagreements.
pub fn check_key_equivalence<S: OreScheme>(
    scheme: &S,
    sk1: &S::SecretKey,
    sk2: &S::SecretKey,
    ell: u8,
    fuzz: usize,
    rng: &mut dyn RngCore,
) -> Result<EquivalenceReport> {
    if ell > MAX_EQUIVALENCE_ELL {
        return Err(Error::usage(format!(
            "key equivalence sweep needs ℓ ≤ {MAX_EQUIVALENCE_ELL}, got {ell}"
        )));
    }
    if sk1.ell() != ell || sk2.ell() != ell {
        return Err(Error::usage("keys do not match the plaintext length"));
    }
    let mut corpus = Vec::new();
    for v in 0..domain_size(ell) as u64 {
        let m = Message::new(v, ell)?;
        corpus.push(scheme.enc(sk1, m, rng));
        corpus.push(scheme.enc(sk2, m, rng));
    }
    let sampler = FuzzSampler::default();
    for _ in 0..fuzz {
        corpus.push(sampler.sample(scheme, sk1, ell, rng).1);
        corpus.push(sampler.sample(scheme, sk2, ell, rng).1);
    }
    let mut report = EquivalenceReport::default();
    for c in corpus {
        let (a, b) = (scheme.dec(sk1, &c), scheme.dec(sk2, &c));
        report.checked += 1;
        if a != b {
            report.mismatch_count += 1;
            if report.mismatches.len() < 8 {
                report.mismatches.push(KeyMismatch {
                    ciphertext: c,
                    first: a.map(Message::value),
                    second: b.map(Message::value),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyspace {
    Oracle,
    Tiny,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SqSettings {
    pub lambda: u32,
    pub ell: u8,
    pub alpha: f64,
    pub mode: AnswerMode,
    pub keyspace: Keyspace,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqRow {
    pub trial: usize,
    pub threshold: u128,
    pub recovered: Option<u128>,
    pub queries: usize,
    pub query_bound: usize,
    pub error: f64,
    pub params_recovered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqReport {
    pub ell: u8,
    pub alpha: f64,
    pub mode: AnswerMode,
    pub keyspace: Keyspace,
    pub trials: usize,
    pub max_error: f64,
    pub max_queries: usize,
    pub query_bound: usize,
    pub all_good: bool,
    pub rows: Vec<SqRow>,
}

/// Per trial: keys (from the tiny keyspace when asked), a uniform threshold
/// in `[0, N]`, the uniform distribution over encryptions of every message,
/// one learner run and the exact error of its output.
pub fn run_sq_experiment<S: OreScheme>(scheme: &S, settings: &SqSettings) -> Result<SqReport> {
    let ell = settings.ell;
    if ell == 0 || ell > 20 {
        return Err(Error::usage(format!(
            "SQ experiment needs 1 ≤ ℓ ≤ 20, got {ell}"
        )));
    }
    let query_bound = 1 + scheme.params_len(ell) * 8 + ell as usize;
    let rows = (0..settings.trials)
        .into_par_iter()
        .map(|trial| -> Result<SqRow> {
            let mut rng = derive_trial_rng(settings.seed, trial as u64);
            let (keys, recovery): (_, Box<dyn KeyRecovery<S>>) = match settings.keyspace {
                Keyspace::Oracle => {
                    let keys =
                        Arc::new(KeyMaterial::sample(scheme, settings.lambda, ell, &mut rng)?);
                    (keys.clone(), Box::new(KnownKeys::new(vec![keys])))
                }
                Keyspace::Tiny => {
                    let search = TinyCoinSearch::new(settings.lambda, ell, MAX_TINY_BITS)?;
                    let ix = uniform_below(&mut rng, search.size() as u128) as u32;
                    let keys = Arc::new(KeyMaterial::generate(
                        scheme,
                        settings.lambda,
                        ell,
                        tiny_coins(ix),
                    )?);
                    (keys, Box::new(search))
                }
            };
            let t = uniform_below(&mut rng, domain_size(ell) + 1) as u128;
            let concept = EncThreshConcept::new(t, keys.clone())?;
            let dist = FiniteDistribution::all_messages(scheme, &keys, &mut rng)?;
            let noise = fresh_seed(&mut rng);
            let mut oracle = StatOracle::new(
                scheme,
                &concept,
                &dist,
                settings.mode,
                settings.alpha,
                noise,
            )?;
            let out = sq_learn(scheme, &mut oracle, settings.alpha, recovery.as_ref())?;
            let params_recovered = match &out.hypothesis {
                SqHypothesis::Threshold { params, .. } => **params == keys.params,
                SqHypothesis::AllZeroes => false,
            };
            Ok(SqRow {
                trial,
                threshold: t,
                recovered: out.hypothesis.threshold(),
                queries: out.queries,
                query_bound,
                error: exact_error(scheme, &out.hypothesis, &concept, &dist).rate,
                params_recovered,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    let max_queries = rows.iter().map(|r| r.queries).max().unwrap_or(0);
    Ok(SqReport {
        ell,
        alpha: settings.alpha,
        mode: settings.mode,
        keyspace: settings.keyspace,
        trials: settings.trials,
        max_error,
        max_queries,
        query_bound,
        all_good: rows
            .iter()
            .all(|r| r.error <= settings.alpha && r.queries <= query_bound),
        rows,
    })
}
