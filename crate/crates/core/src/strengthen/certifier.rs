//! Well-formedness certificates for base ciphertexts.
//!
//! A statement `(params′, σ, c′)` is true when some key `sk′` with
//! `σ = Com(sk′; r)` for some `r` produces `c′ = Enc′(sk′, m)` for some `m`.
//! Two certifiers are provided:
//!
//! * [`EscrowCertifier`] keeps `sk′` and `r` inside its verification key and
//!   decides the statement directly. It is perfectly sound and perfectly
//!   complete, but its public parameters reveal the secret key, so it is only
//!   meaningful inside simulations.
//! * [`SignatureCertifier`] signs the canonical statement encoding with a key
//!   created at generation time. Verification is public and soundness is
//!   computational: a false statement verifies only if a signature is forged.

use std::fmt;

use ed25519_dalek::{SigningKey, VerifyingKey};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::commitment::{commit, Commitment};
use crate::codec::{put, Encodable, Reader};
use crate::ore::{Ciphertext, DeterministicOre, Message};
use crate::signature::{Ed25519, SignatureScheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundnessMode {
    Perfect,
    Computational,
}

impl SoundnessMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SoundnessMode::Perfect => "perfect",
            SoundnessMode::Computational => "computational",
        }
    }
}

const STATEMENT_TAG: &[u8] = b"ORE-STMT\x01";

/// The claim that `base_ciphertext` is an honest encryption under the key
/// committed to by `sigma`.
#[derive(Clone, Copy, Debug)]
pub struct Statement<'a> {
    /// Encoded base parameters.
    pub base_params: &'a [u8],
    pub sigma: &'a Commitment,
    pub base_ciphertext: &'a Ciphertext,
}

impl Statement<'_> {
    /// `"ORE-STMT\x01" ‖ [params′] ‖ [σ] ‖ [c′]`, each field length-prefixed.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            STATEMENT_TAG.len() + 12 + self.base_params.len() + 32 + self.base_ciphertext.len(),
        );
        out.extend_from_slice(STATEMENT_TAG);
        put(&mut out, self.base_params);
        put(&mut out, &self.sigma.0);
        put(&mut out, self.base_ciphertext.as_bytes());
        out
    }
}

/// Witness for a true statement.
pub struct Witness<'a, K> {
    pub message: Message,
    pub base_sk: &'a K,
    pub commit_rand: &'a [u8; 32],
}

pub trait Certifier<B: DeterministicOre>: Send + Sync {
    type ProvingKey: Clone + Send + Sync + Encodable;
    type VerifyingKey: Clone + PartialEq + Eq + fmt::Debug + Send + Sync + Encodable;

    fn name(&self) -> &'static str;

    fn mode(&self) -> SoundnessMode;

    fn setup(
        &self,
        base: &B,
        base_sk: &B::SecretKey,
        base_params: &B::Params,
        commit_rand: &[u8; 32],
        sigma: &Commitment,
        rng: &mut dyn RngCore,
    ) -> (Self::ProvingKey, Self::VerifyingKey);

    fn certify(
        &self,
        pk: &Self::ProvingKey,
        statement: &Statement<'_>,
        witness: &Witness<'_, B::SecretKey>,
    ) -> Vec<u8>;

    /// Deterministic.
    fn verify(
        &self,
        base: &B,
        vk: &Self::VerifyingKey,
        statement: &Statement<'_>,
        cert: &[u8],
    ) -> bool;
}

/// Placeholder proving key for certifiers that need none.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NoProvingKey;

impl Encodable for NoProvingKey {
    fn to_bytes(&self) -> Vec<u8> {
        Vec::new()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        bytes.is_empty().then_some(NoProvingKey)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EscrowCertifier;

/// Escrowed base key and commitment opening.
#[derive(Clone)]
pub struct EscrowKey<K> {
    base_sk: K,
    commit_rand: [u8; 32],
    sigma: Commitment,
    base_params: Vec<u8>,
    encoded: Vec<u8>,
}

impl<K: Encodable> EscrowKey<K> {
    fn new(base_sk: K, commit_rand: [u8; 32], base_params: Vec<u8>) -> Self {
        let sk_bytes = base_sk.to_bytes();
        let sigma = commit(&sk_bytes, &commit_rand);
        let mut encoded = Vec::new();
        put(&mut encoded, &sk_bytes);
        put(&mut encoded, &commit_rand);
        put(&mut encoded, &base_params);
        EscrowKey {
            base_sk,
            commit_rand,
            sigma,
            base_params,
            encoded,
        }
    }

    /// The escrowed base key. Simulation-only: used by negative controls that
    /// model an adversary holding the secret key.
    pub fn leak(&self) -> &K {
        &self.base_sk
    }

    pub fn commit_rand(&self) -> &[u8; 32] {
        &self.commit_rand
    }
}

impl<K> PartialEq for EscrowKey<K> {
    fn eq(&self, other: &Self) -> bool {
        self.encoded == other.encoded
    }
}

impl<K> Eq for EscrowKey<K> {}

impl<K> fmt::Debug for EscrowKey<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EscrowKey(σ={})", hex::encode(self.sigma.0))
    }
}

impl<K: Encodable> Encodable for EscrowKey<K> {
    fn to_bytes(&self) -> Vec<u8> {
        self.encoded.clone()
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let base_sk = K::from_bytes(r.field()?)?;
        let commit_rand = r.array()?;
        let base_params = r.field()?.to_vec();
        r.finish()?;
        let key = EscrowKey::new(base_sk, commit_rand, base_params);
        (key.encoded == bytes).then_some(key)
    }
}

impl<B: DeterministicOre> Certifier<B> for EscrowCertifier {
    type ProvingKey = NoProvingKey;
    type VerifyingKey = EscrowKey<B::SecretKey>;

    fn name(&self) -> &'static str {
        "escrow"
    }

    fn mode(&self) -> SoundnessMode {
        SoundnessMode::Perfect
    }

    fn setup(
        &self,
        _base: &B,
        base_sk: &B::SecretKey,
        base_params: &B::Params,
        commit_rand: &[u8; 32],
        sigma: &Commitment,
        _rng: &mut dyn RngCore,
    ) -> (NoProvingKey, EscrowKey<B::SecretKey>) {
        let vk = EscrowKey::new(base_sk.clone(), *commit_rand, base_params.to_bytes());
        debug_assert_eq!(vk.sigma, *sigma);
        (NoProvingKey, vk)
    }

    fn certify(
        &self,
        _pk: &NoProvingKey,
        _statement: &Statement<'_>,
        _witness: &Witness<'_, B::SecretKey>,
    ) -> Vec<u8> {
        Vec::new()
    }

    fn verify(
        &self,
        base: &B,
        vk: &EscrowKey<B::SecretKey>,
        statement: &Statement<'_>,
        cert: &[u8],
    ) -> bool {
        cert.is_empty()
            && *statement.sigma == vk.sigma
            && statement.base_params == vk.base_params.as_slice()
            && base.is_canonical(&vk.base_sk, statement.base_ciphertext)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SignatureCertifier;

impl Encodable for SigningKey {
    fn to_bytes(&self) -> Vec<u8> {
        Ed25519.signing_key_bytes(self)
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        Ed25519.signing_key_from_bytes(bytes)
    }
}

impl Encodable for VerifyingKey {
    fn to_bytes(&self) -> Vec<u8> {
        Ed25519.verifying_key_bytes(self)
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        Ed25519.verifying_key_from_bytes(bytes)
    }
}

impl<B: DeterministicOre> Certifier<B> for SignatureCertifier {
    type ProvingKey = SigningKey;
    type VerifyingKey = VerifyingKey;

    fn name(&self) -> &'static str {
        "signature"
    }

    fn mode(&self) -> SoundnessMode {
        SoundnessMode::Computational
    }

    fn setup(
        &self,
        _base: &B,
        _base_sk: &B::SecretKey,
        _base_params: &B::Params,
        _commit_rand: &[u8; 32],
        _sigma: &Commitment,
        rng: &mut dyn RngCore,
    ) -> (SigningKey, VerifyingKey) {
        Ed25519.gen(0, rng)
    }

    fn certify(
        &self,
        pk: &SigningKey,
        statement: &Statement<'_>,
        _witness: &Witness<'_, B::SecretKey>,
    ) -> Vec<u8> {
        Ed25519.sign(
            pk,
            &statement.encode(),
            &mut rand::rngs::mock::StepRng::new(0, 0),
        )
    }

    fn verify(&self, _base: &B, vk: &VerifyingKey, statement: &Statement<'_>, cert: &[u8]) -> bool {
        Ed25519.verify(vk, &statement.encode(), cert)
    }
}
