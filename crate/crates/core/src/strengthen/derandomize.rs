//! Derandomized encryption: the coins for `Enc(sk, m)` are drawn from a
//! ChaCha20 stream seeded by a PRF of `m` under a key held next to `sk`.

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::codec::{put, Encodable, Reader};
use crate::error::Result;
use crate::ore::{Ciphertext, CompareResult, DeterministicOre, Message, OreScheme, PlaintextLen};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, Default)]
pub struct Derandomized<B> {
    pub base: B,
}

impl<B> Derandomized<B> {
    pub fn new(base: B) -> Self {
        Derandomized { base }
    }
}

#[derive(Clone)]
pub struct DerandKey<K> {
    pub base: K,
    prf_key: [u8; 32],
}

impl<K: PlaintextLen> PlaintextLen for DerandKey<K> {
    fn ell(&self) -> u8 {
        self.base.ell()
    }
}

impl<K: Encodable> Encodable for DerandKey<K> {
    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, &self.base.to_bytes());
        put(&mut out, &self.prf_key);
        out
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let base = K::from_bytes(r.field()?)?;
        let prf_key = r.array()?;
        r.finish()?;
        Some(DerandKey { base, prf_key })
    }
}

fn coins_for(prf_key: &[u8; 32], m: Message) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ore-learn/derand/v1");
    h.update(prf_key);
    h.update([m.ell()]);
    h.update(m.value().to_be_bytes());
    h.finalize().into()
}

impl<B: OreScheme> OreScheme for Derandomized<B> {
    type SecretKey = DerandKey<B::SecretKey>;
    type Params = B::Params;

    fn name(&self) -> String {
        format!("derandomized-{}", self.base.name())
    }

    fn gen(
        &self,
        lambda: u32,
        ell: u8,
        rng: &mut dyn RngCore,
    ) -> Result<(Self::SecretKey, B::Params)> {
        let (base, params) = self.base.gen(lambda, ell, rng)?;
        let mut prf_key = [0u8; 32];
        rng.fill_bytes(&mut prf_key);
        Ok((DerandKey { base, prf_key }, params))
    }

    fn enc(&self, sk: &Self::SecretKey, m: Message, _rng: &mut dyn RngCore) -> Ciphertext {
        self.enc_det(sk, m)
    }

    fn dec(&self, sk: &Self::SecretKey, c: &Ciphertext) -> Option<Message> {
        self.base.dec(&sk.base, c)
    }

    fn admits(&self, params: &B::Params, c: &Ciphertext) -> bool {
        self.base.admits(params, c)
    }

    fn comp_admitted(&self, params: &B::Params, c0: &Ciphertext, c1: &Ciphertext) -> CompareResult {
        self.base.comp_admitted(params, c0, c1)
    }

    fn params_len(&self, ell: u8) -> usize {
        self.base.params_len(ell)
    }
}

impl<B: OreScheme> DeterministicOre for Derandomized<B> {
    fn enc_det(&self, sk: &Self::SecretKey, m: Message) -> Ciphertext {
        let mut rng = rng_from_seed(coins_for(&sk.prf_key, m));
        self.base.enc(&sk.base, m, &mut rng)
    }
}
