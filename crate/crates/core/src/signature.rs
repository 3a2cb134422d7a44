//! Digital signatures: the interface shared by the signature certifier and the
//! signature-based concept class, and an Ed25519 back-end.
//!
//! Ed25519 verification here uses the strict variant, which rejects
//! non-canonical scalars and small-order points. That makes signatures
//! non-malleable: a second valid signature on a signed message cannot be
//! derived from the first without the signing key.

use std::fmt;

use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use rand::RngCore;

pub trait SignatureScheme: Send + Sync {
    type SigningKey: Clone + Send + Sync;
    type VerifyingKey: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn gen(&self, lambda: u32, rng: &mut dyn RngCore) -> (Self::SigningKey, Self::VerifyingKey);

    fn sign(&self, sk: &Self::SigningKey, msg: &[u8], rng: &mut dyn RngCore) -> Vec<u8>;

    /// Deterministic.
    fn verify(&self, vk: &Self::VerifyingKey, msg: &[u8], sig: &[u8]) -> bool;

    fn verifying_key_bytes(&self, vk: &Self::VerifyingKey) -> Vec<u8>;

    fn verifying_key_from_bytes(&self, bytes: &[u8]) -> Option<Self::VerifyingKey>;

    fn signing_key_bytes(&self, sk: &Self::SigningKey) -> Vec<u8>;

    fn signing_key_from_bytes(&self, bytes: &[u8]) -> Option<Self::SigningKey>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Ed25519;

pub const ED25519_SIG_LEN: usize = 64;

impl SignatureScheme for Ed25519 {
    type SigningKey = SigningKey;
    type VerifyingKey = VerifyingKey;

    fn name(&self) -> &'static str {
        "ed25519"
    }

    fn gen(&self, _lambda: u32, rng: &mut dyn RngCore) -> (SigningKey, VerifyingKey) {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let sk = SigningKey::from_bytes(&seed);
        let vk = sk.verifying_key();
        (sk, vk)
    }

    fn sign(&self, sk: &SigningKey, msg: &[u8], _rng: &mut dyn RngCore) -> Vec<u8> {
        sk.sign(msg).to_bytes().to_vec()
    }

    fn verify(&self, vk: &VerifyingKey, msg: &[u8], sig: &[u8]) -> bool {
        match Signature::from_slice(sig) {
            Ok(s) => vk.verify_strict(msg, &s).is_ok(),
            Err(_) => false,
        }
    }

    fn verifying_key_bytes(&self, vk: &VerifyingKey) -> Vec<u8> {
        vk.to_bytes().to_vec()
    }

    fn verifying_key_from_bytes(&self, bytes: &[u8]) -> Option<VerifyingKey> {
        VerifyingKey::from_bytes(bytes.try_into().ok()?).ok()
    }

    fn signing_key_bytes(&self, sk: &SigningKey) -> Vec<u8> {
        sk.to_bytes().to_vec()
    }

    fn signing_key_from_bytes(&self, bytes: &[u8]) -> Option<SigningKey> {
        Some(SigningKey::from_bytes(bytes.try_into().ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn sign_verify_and_reject_tampering() {
        let mut rng = rng_from_seed([5; 32]);
        let (sk, vk) = Ed25519.gen(128, &mut rng);
        let sig = Ed25519.sign(&sk, b"hello", &mut rng);
        assert!(Ed25519.verify(&vk, b"hello", &sig));
        assert!(!Ed25519.verify(&vk, b"hellp", &sig));
        let mut bad = sig.clone();
        bad[10] ^= 4;
        assert!(!Ed25519.verify(&vk, b"hello", &bad));
        assert!(!Ed25519.verify(&vk, b"hello", &sig[..63]));
        let (_, vk2) = Ed25519.gen(128, &mut rng);
        assert!(!Ed25519.verify(&vk2, b"hello", &sig));
    }

    #[test]
    fn key_bytes_round_trip() {
        let mut rng = rng_from_seed([6; 32]);
        let (sk, vk) = Ed25519.gen(128, &mut rng);
        let vk2 = Ed25519
            .verifying_key_from_bytes(&Ed25519.verifying_key_bytes(&vk))
            .unwrap();
        assert_eq!(vk, vk2);
        let sk2 = Ed25519
            .signing_key_from_bytes(&Ed25519.signing_key_bytes(&sk))
            .unwrap();
        assert_eq!(
            Ed25519.sign(&sk2, b"x", &mut rng),
            Ed25519.sign(&sk, b"x", &mut rng)
        );
    }
}
