//! The weak-to-strong transformation.
//!
//! Given a deterministic ORE `(Gen′, Enc′, Dec′, Comp′)` with weakly correct
//! comparison and a certifier:
//!
//! * `Gen` runs `Gen′`, commits to `sk′` as `σ = Com(sk′; r)`, and sets up
//!   the certifier. `sk = (sk′, r, pk)`, `params = (params′, σ, vk)`.
//! * `Enc(sk, m)` outputs `c′ = Enc′(sk′, m)` together with a certificate that
//!   the statement `(params′, σ, c′)` is true.
//! * `Dec` and `Comp` output ⊥ when a certificate fails to verify and
//!   otherwise delegate to `Dec′` and `Comp′`.
//!
//! Ciphertext layout: `0x02 ‖ ℓ ‖ [c′] ‖ [π]`, each bracketed field prefixed
//! with its length as a big-endian `u32`.

pub mod certifier;
pub mod commitment;
pub mod derandomize;

use std::fmt;

use rand::RngCore;

pub use certifier::{
    Certifier, EscrowCertifier, EscrowKey, NoProvingKey, SignatureCertifier, SoundnessMode,
    Statement, Witness,
};
pub use commitment::{binding_check, commit, BindingReport, Commitment};
pub use derandomize::Derandomized;

use crate::codec::{put, Encodable, Reader};
use crate::error::Result;
use crate::ore::{Ciphertext, CompareResult, DeterministicOre, Message, OreScheme, PlaintextLen};

pub const VERSION: u8 = 0x02;

#[derive(Clone, Copy, Debug, Default)]
pub struct Strengthened<B, C> {
    pub base: B,
    pub certifier: C,
}

/// Strengthens `base` with `certifier`.
pub fn strengthen<B: DeterministicOre, C: Certifier<B>>(
    base: B,
    certifier: C,
) -> Strengthened<B, C> {
    Strengthened { base, certifier }
}

pub struct StrongParams<B: DeterministicOre, C: Certifier<B>> {
    pub base: B::Params,
    base_bytes: Vec<u8>,
    pub sigma: Commitment,
    pub vk: C::VerifyingKey,
}

impl<B: DeterministicOre, C: Certifier<B>> StrongParams<B, C> {
    fn new(base: B::Params, sigma: Commitment, vk: C::VerifyingKey) -> Self {
        let base_bytes = base.to_bytes();
        StrongParams {
            base,
            base_bytes,
            sigma,
            vk,
        }
    }

    fn statement<'a>(&'a self, c: &'a Ciphertext) -> Statement<'a> {
        Statement {
            base_params: &self.base_bytes,
            sigma: &self.sigma,
            base_ciphertext: c,
        }
    }
}

impl<B: DeterministicOre, C: Certifier<B>> Clone for StrongParams<B, C> {
    fn clone(&self) -> Self {
        StrongParams {
            base: self.base.clone(),
            base_bytes: self.base_bytes.clone(),
            sigma: self.sigma,
            vk: self.vk.clone(),
        }
    }
}

impl<B: DeterministicOre, C: Certifier<B>> PartialEq for StrongParams<B, C> {
    fn eq(&self, other: &Self) -> bool {
        self.sigma == other.sigma && self.base == other.base && self.vk == other.vk
    }
}

impl<B: DeterministicOre, C: Certifier<B>> Eq for StrongParams<B, C> {}

impl<B: DeterministicOre, C: Certifier<B>> fmt::Debug for StrongParams<B, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StrongParams")
            .field("base", &self.base)
            .field("sigma", &self.sigma)
            .field("vk", &self.vk)
            .finish()
    }
}

impl<B: DeterministicOre, C: Certifier<B>> PlaintextLen for StrongParams<B, C> {
    fn ell(&self) -> u8 {
        self.base.ell()
    }
}

impl<B: DeterministicOre, C: Certifier<B>> Encodable for StrongParams<B, C> {
    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, &self.base_bytes);
        put(&mut out, &self.sigma.0);
        put(&mut out, &self.vk.to_bytes());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let base = B::Params::from_bytes(r.field()?)?;
        let sigma = Commitment(r.array()?);
        let vk = C::VerifyingKey::from_bytes(r.field()?)?;
        r.finish()?;
        Some(StrongParams::new(base, sigma, vk))
    }
}

pub struct StrongKey<B: DeterministicOre, C: Certifier<B>> {
    pub base: B::SecretKey,
    pub commit_rand: [u8; 32],
    pub pk: C::ProvingKey,
    pub params: StrongParams<B, C>,
}

impl<B: DeterministicOre, C: Certifier<B>> Clone for StrongKey<B, C> {
    fn clone(&self) -> Self {
        StrongKey {
            base: self.base.clone(),
            commit_rand: self.commit_rand,
            pk: self.pk.clone(),
            params: self.params.clone(),
        }
    }
}

impl<B: DeterministicOre, C: Certifier<B>> PlaintextLen for StrongKey<B, C> {
    fn ell(&self) -> u8 {
        self.base.ell()
    }
}

impl<B: DeterministicOre, C: Certifier<B>> Encodable for StrongKey<B, C> {
    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, &self.base.to_bytes());
        put(&mut out, &self.commit_rand);
        put(&mut out, &self.pk.to_bytes());
        put(&mut out, &self.params.to_bytes());
        out
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let base = B::SecretKey::from_bytes(r.field()?)?;
        let commit_rand = r.array()?;
        let pk = C::ProvingKey::from_bytes(r.field()?)?;
        let params = StrongParams::from_bytes(r.field()?)?;
        r.finish()?;
        Some(StrongKey {
            base,
            commit_rand,
            pk,
            params,
        })
    }
}

/// Splits a strengthened ciphertext into base ciphertext and certificate.
pub fn split(ell: u8, c: &Ciphertext) -> Option<(Ciphertext, &[u8])> {
    let (cell, body) = c.frame(VERSION)?;
    if cell != ell {
        return None;
    }
    let mut r = Reader::new(body);
    let inner = r.field()?;
    let cert = r.field()?;
    r.finish()?;
    Some((Ciphertext::from_bytes(inner), cert))
}

/// Joins a base ciphertext and a certificate into a strengthened ciphertext.
pub fn join(ell: u8, inner: &Ciphertext, cert: &[u8]) -> Ciphertext {
    Ciphertext::framed_fields(VERSION, ell, &[inner.as_bytes(), cert])
}

impl<B: DeterministicOre, C: Certifier<B>> Strengthened<B, C> {
    pub fn soundness(&self) -> SoundnessMode {
        self.certifier.mode()
    }

    fn verified(&self, params: &StrongParams<B, C>, c: &Ciphertext) -> Option<Ciphertext> {
        let (inner, cert) = split(params.ell(), c)?;
        self.certifier
            .verify(&self.base, &params.vk, &params.statement(&inner), cert)
            .then_some(inner)
    }
}

impl<B: DeterministicOre, C: Certifier<B>> OreScheme for Strengthened<B, C> {
    type SecretKey = StrongKey<B, C>;
    type Params = StrongParams<B, C>;

    fn name(&self) -> String {
        format!(
            "strengthened-{}-{}",
            self.base.name(),
            self.certifier.name()
        )
    }

    fn gen(
        &self,
        lambda: u32,
        ell: u8,
        rng: &mut dyn RngCore,
    ) -> Result<(Self::SecretKey, Self::Params)> {
        let (base_sk, base_params) = self.base.gen(lambda, ell, rng)?;
        let mut commit_rand = [0u8; 32];
        rng.fill_bytes(&mut commit_rand);
        let sigma = commit(&base_sk.to_bytes(), &commit_rand);
        let (pk, vk) = self.certifier.setup(
            &self.base,
            &base_sk,
            &base_params,
            &commit_rand,
            &sigma,
            rng,
        );
        let params = StrongParams::new(base_params, sigma, vk);
        let sk = StrongKey {
            base: base_sk,
            commit_rand,
            pk,
            params: params.clone(),
        };
        Ok((sk, params))
    }

    fn enc(&self, sk: &Self::SecretKey, m: Message, _rng: &mut dyn RngCore) -> Ciphertext {
        let inner = self.base.enc_det(&sk.base, m);
        let witness = Witness {
            message: m,
            base_sk: &sk.base,
            commit_rand: &sk.commit_rand,
        };
        let cert = self
            .certifier
            .certify(&sk.pk, &sk.params.statement(&inner), &witness);
        join(sk.ell(), &inner, &cert)
    }

    fn dec(&self, sk: &Self::SecretKey, c: &Ciphertext) -> Option<Message> {
        let inner = self.verified(&sk.params, c)?;
        self.base.dec(&sk.base, &inner)
    }

    fn admits(&self, params: &Self::Params, c: &Ciphertext) -> bool {
        self.verified(params, c).is_some()
    }

    fn comp_admitted(
        &self,
        params: &Self::Params,
        c0: &Ciphertext,
        c1: &Ciphertext,
    ) -> CompareResult {
        match (split(params.ell(), c0), split(params.ell(), c1)) {
            (Some((a, _)), Some((b, _))) => self.base.comp(&params.base, &a, &b),
            _ => CompareResult::Bot,
        }
    }

    fn params_len(&self, ell: u8) -> usize {
        let mut rng = crate::rng::rng_from_seed([0; 32]);
        self.gen(0, ell, &mut rng)
            .map(|(_, p)| p.to_bytes().len())
            .unwrap_or(0)
    }
}

impl<B: DeterministicOre, C: Certifier<B>> DeterministicOre for Strengthened<B, C> {
    fn enc_det(&self, sk: &Self::SecretKey, m: Message) -> Ciphertext {
        self.enc(sk, m, &mut crate::rng::rng_from_seed([0; 32]))
    }
}

pub type EscrowOre = Strengthened<crate::opf::OpfOre, EscrowCertifier>;
pub type SignatureOre = Strengthened<crate::opf::OpfOre, SignatureCertifier>;

pub fn escrow_ore() -> EscrowOre {
    strengthen(crate::opf::OpfOre, EscrowCertifier)
}

pub fn signature_ore() -> SignatureOre {
    strengthen(crate::opf::OpfOre, SignatureCertifier)
}
