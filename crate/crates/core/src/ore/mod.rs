//! Order-revealing encryption: the scheme interface, the plaintext and
//! ciphertext model, and the reference comparators.
//!
//! Plaintexts live in `{0, …, 2^ℓ − 1}`. A ciphertext is an arbitrary byte
//! string; honest ones are framed as `version ‖ ℓ ‖ body`, but every operation
//! must accept any bytes at all, because strong comparison correctness
//! quantifies over all ciphertexts.

pub mod correctness;

use std::fmt;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::codec::Encodable;
use crate::error::{Error, Result};
use crate::rng::Seed;

pub use correctness::{
    check_decryption_correctness, check_strong_correctness, check_strong_on_pairs,
    check_strong_with_key, check_weak_correctness, check_weak_with_key, DecryptionReport,
    FuzzSampler, MutationClass, StrongReport, StrongRow, WeakReport,
};

pub const MAX_ELL: u8 = 64;

/// `N = 2^ℓ`, the number of plaintexts.
pub fn domain_size(ell: u8) -> u128 {
    1u128 << ell
}

fn check_ell(ell: u8) -> Result<()> {
    if ell == 0 || ell > MAX_ELL {
        return Err(Error::usage(format!(
            "plaintext length ℓ={ell} outside 1..={MAX_ELL}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    value: u64,
    ell: u8,
}

impl Message {
    pub fn new(value: u64, ell: u8) -> Result<Self> {
        check_ell(ell)?;
        if (value as u128) >= domain_size(ell) {
            return Err(Error::usage(format!(
                "message {value} outside [0, 2^{ell})"
            )));
        }
        Ok(Message { value, ell })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn ell(self) -> u8 {
        self.ell
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering3 {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
}

impl Ordering3 {
    pub fn reverse(self) -> Self {
        match self {
            Ordering3::Lt => Ordering3::Gt,
            Ordering3::Gt => Ordering3::Lt,
            Ordering3::Eq => Ordering3::Eq,
        }
    }
}

impl From<std::cmp::Ordering> for Ordering3 {
    fn from(o: std::cmp::Ordering) -> Self {
        match o {
            std::cmp::Ordering::Less => Ordering3::Lt,
            std::cmp::Ordering::Equal => Ordering3::Eq,
            std::cmp::Ordering::Greater => Ordering3::Gt,
        }
    }
}

impl fmt::Display for Ordering3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering3::Lt => "<",
            Ordering3::Eq => "=",
            Ordering3::Gt => ">",
        })
    }
}

/// Output of a comparison: an order, or ⊥ when a ciphertext is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareResult {
    Ordered(Ordering3),
    Bot,
}

impl CompareResult {
    pub fn is_bot(self) -> bool {
        self == CompareResult::Bot
    }

    /// True for `<` and `=`.
    pub fn is_at_most(self) -> bool {
        matches!(self, CompareResult::Ordered(Ordering3::Lt | Ordering3::Eq))
    }
}

impl From<Ordering3> for CompareResult {
    fn from(o: Ordering3) -> Self {
        CompareResult::Ordered(o)
    }
}

impl fmt::Display for CompareResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareResult::Ordered(o) => o.fmt(f),
            CompareResult::Bot => f.write_str("⊥"),
        }
    }
}

type Bytes = SmallVec<[u8; 64]>;

/// An opaque ciphertext. Any byte string is admissible.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ciphertext(Bytes);

impl Ciphertext {
    pub fn from_bytes(bytes: impl AsRef<[u8]>) -> Self {
        Ciphertext(Bytes::from_slice(bytes.as_ref()))
    }

    /// Builds `version ‖ ℓ ‖ body`.
    pub fn framed(version: u8, ell: u8, body: &[u8]) -> Self {
        let mut v = Bytes::with_capacity(2 + body.len());
        v.push(version);
        v.push(ell);
        v.extend_from_slice(body);
        Ciphertext(v)
    }

    /// Builds `version ‖ ℓ ‖ field…`, each field prefixed with its length as a
    /// big-endian `u32` (the layout `codec::put` writes).
    pub fn framed_fields(version: u8, ell: u8, fields: &[&[u8]]) -> Self {
        let len = 2 + fields.iter().map(|f| 4 + f.len()).sum::<usize>();
        let mut v = Bytes::with_capacity(len);
        v.push(version);
        v.push(ell);
        for f in fields {
            v.extend_from_slice(&(f.len() as u32).to_be_bytes());
            v.extend_from_slice(f);
        }
        Ciphertext(v)
    }

    /// Splits the frame header off when it carries the expected version.
    pub fn frame(&self, version: u8) -> Option<(u8, &[u8])> {
        match self.0.as_slice() {
            [v, ell, body @ ..] if *v == version => Some((*ell, body)),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0.into_vec()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext({})", hex::encode(&self.0))
    }
}

impl Serialize for Ciphertext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Ciphertext {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s)
            .map(Ciphertext::from_bytes)
            .map_err(serde::de::Error::custom)
    }
}

/// Plaintext length carried by keys and parameters.
pub trait PlaintextLen {
    fn ell(&self) -> u8;
}

/// An ORE scheme `(Gen, Enc, Dec, Comp)`.
///
/// `dec` and `comp` are deterministic. `gen` draws all of its randomness from
/// the supplied RNG, so seeding that RNG with a coin string fixes the keys.
///
/// Comparison is split in two phases: `admits` is the per-ciphertext check
/// `comp` runs before comparing, and `comp_admitted` compares two ciphertexts
/// that both passed it. `comp` must equal the composition, which lets callers
/// that compare many ciphertexts against one fixed anchor check the anchor once.
pub trait OreScheme: Send + Sync {
    type SecretKey: Clone + Send + Sync + Encodable + PlaintextLen;
    type Params: Clone + PartialEq + Eq + fmt::Debug + Send + Sync + Encodable + PlaintextLen;

    fn name(&self) -> String;

    fn gen(
        &self,
        lambda: u32,
        ell: u8,
        rng: &mut dyn RngCore,
    ) -> Result<(Self::SecretKey, Self::Params)>;

    fn enc(&self, sk: &Self::SecretKey, m: Message, rng: &mut dyn RngCore) -> Ciphertext;

    /// `None` is ⊥.
    fn dec(&self, sk: &Self::SecretKey, c: &Ciphertext) -> Option<Message>;

    fn admits(&self, _params: &Self::Params, _c: &Ciphertext) -> bool {
        true
    }

    fn comp_admitted(
        &self,
        params: &Self::Params,
        c0: &Ciphertext,
        c1: &Ciphertext,
    ) -> CompareResult;

    fn comp(&self, params: &Self::Params, c0: &Ciphertext, c1: &Ciphertext) -> CompareResult {
        if self.admits(params, c0) && self.admits(params, c1) {
            self.comp_admitted(params, c0, c1)
        } else {
            CompareResult::Bot
        }
    }

    /// Length in bytes of `Params::to_bytes` for plaintext length `ell`.
    fn params_len(&self, ell: u8) -> usize;
}

/// A scheme whose encryption uses no randomness.
pub trait DeterministicOre: OreScheme {
    fn enc_det(&self, sk: &Self::SecretKey, m: Message) -> Ciphertext;

    /// True iff `c = enc_det(sk, dec(sk, c))`, i.e. `c` is the unique honest
    /// encryption of its plaintext. Schemes may override with a cheaper
    /// equivalent test.
    fn is_canonical(&self, sk: &Self::SecretKey, c: &Ciphertext) -> bool {
        match self.dec(sk, c) {
            Some(m) => self.enc_det(sk, m) == *c,
            None => false,
        }
    }
}

/// Keys together with the coin string that produced them.
#[derive(Clone)]
pub struct KeyMaterial<S: OreScheme> {
    pub coins: Seed,
    pub lambda: u32,
    pub sk: S::SecretKey,
    pub params: S::Params,
}

impl<S: OreScheme> KeyMaterial<S> {
    /// Runs `Gen(1^λ, 1^ℓ)` on the coin string `coins`.
    pub fn generate(scheme: &S, lambda: u32, ell: u8, coins: Seed) -> Result<Self> {
        let mut rng = ChaCha20Rng::from_seed(coins);
        let (sk, params) = scheme.gen(lambda, ell, &mut rng)?;
        Ok(KeyMaterial {
            coins,
            lambda,
            sk,
            params,
        })
    }

    pub fn sample(scheme: &S, lambda: u32, ell: u8, rng: &mut dyn RngCore) -> Result<Self> {
        Self::generate(scheme, lambda, ell, crate::rng::fresh_seed(rng))
    }

    pub fn ell(&self) -> u8 {
        self.params.ell()
    }
}

impl<S: OreScheme> fmt::Debug for KeyMaterial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyMaterial")
            .field("coins", &hex::encode(self.coins))
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

/// Plaintext comparison.
pub fn comp_plain(m0: Message, m1: Message) -> Result<Ordering3> {
    if m0.ell != m1.ell {
        return Err(Error::usage(format!(
            "cannot compare messages of lengths {} and {}",
            m0.ell, m1.ell
        )));
    }
    Ok(m0.value.cmp(&m1.value).into())
}

/// Decrypt-then-compare using the secret key; ⊥ if either decryption fails.
pub fn comp_ciph<S: OreScheme>(
    scheme: &S,
    sk: &S::SecretKey,
    c0: &Ciphertext,
    c1: &Ciphertext,
) -> CompareResult {
    match (scheme.dec(sk, c0), scheme.dec(sk, c1)) {
        (Some(m0), Some(m1)) => match comp_plain(m0, m1) {
            Ok(o) => o.into(),
            Err(_) => CompareResult::Bot,
        },
        _ => CompareResult::Bot,
    }
}
