//! Plaintext stub schemes for tests that need cheap or deliberately broken
//! encryption.
#![allow(dead_code)]

use ore_learn::codec::Encodable;
use ore_learn::ore::{
    Ciphertext, CompareResult, DeterministicOre, Message, Ordering3, OreScheme, PlaintextLen,
};
use ore_learn::Result;
use rand::RngCore;

const VERSION: u8 = 0x7f;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flaw {
    None,
    /// Decryption always returns 0.
    DecZero,
    /// Comparison reports the reverse order.
    Inverted,
    /// Encryption appends 8 random bytes that decryption ignores.
    Randomized,
}

/// "Encryption" writes the plaintext in the clear after the instance id.
#[derive(Clone, Copy, Debug)]
pub struct PlainOre(pub Flaw);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainKey {
    pub ell: u8,
    pub id: u64,
}

impl PlaintextLen for PlainKey {
    fn ell(&self) -> u8 {
        self.ell
    }
}

impl Encodable for PlainKey {
    fn to_bytes(&self) -> Vec<u8> {
        let mut v = vec![self.ell];
        v.extend_from_slice(&self.id.to_be_bytes());
        v
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let (&ell, id) = bytes.split_first()?;
        Some(PlainKey {
            ell,
            id: u64::from_be_bytes(id.try_into().ok()?),
        })
    }
}

fn body(c: &Ciphertext, ell: u8, id: u64) -> Option<u64> {
    let (cell, b) = c.frame(VERSION)?;
    if cell != ell || b.len() < 16 {
        return None;
    }
    if u64::from_be_bytes(b[..8].try_into().ok()?) != id {
        return None;
    }
    let v = u64::from_be_bytes(b[8..16].try_into().ok()?);
    ((v as u128) < (1u128 << ell)).then_some(v)
}

impl OreScheme for PlainOre {
    type SecretKey = PlainKey;
    type Params = PlainKey;

    fn name(&self) -> String {
        format!("plain-{:?}", self.0)
    }

    fn gen(&self, _lambda: u32, ell: u8, rng: &mut dyn RngCore) -> Result<(PlainKey, PlainKey)> {
        let k = PlainKey {
            ell,
            id: rng.next_u64(),
        };
        Ok((k.clone(), k))
    }

    fn enc(&self, sk: &PlainKey, m: Message, rng: &mut dyn RngCore) -> Ciphertext {
        let mut b = Vec::with_capacity(24);
        b.extend_from_slice(&sk.id.to_be_bytes());
        b.extend_from_slice(&m.value().to_be_bytes());
        if self.0 == Flaw::Randomized {
            b.extend_from_slice(&rng.next_u64().to_be_bytes());
        }
        Ciphertext::framed(VERSION, sk.ell, &b)
    }

    fn dec(&self, sk: &PlainKey, c: &Ciphertext) -> Option<Message> {
        let v = body(c, sk.ell, sk.id)?;
        let v = if self.0 == Flaw::DecZero { 0 } else { v };
        Message::new(v, sk.ell).ok()
    }

    fn comp_admitted(&self, params: &PlainKey, c0: &Ciphertext, c1: &Ciphertext) -> CompareResult {
        match (
            body(c0, params.ell, params.id),
            body(c1, params.ell, params.id),
        ) {
            (Some(a), Some(b)) => {
                let o = Ordering3::from(a.cmp(&b));
                if self.0 == Flaw::Inverted {
                    o.reverse().into()
                } else {
                    o.into()
                }
            }
            _ => CompareResult::Bot,
        }
    }

    fn params_len(&self, _ell: u8) -> usize {
        9
    }
}

impl DeterministicOre for PlainOre {
    fn enc_det(&self, sk: &PlainKey, m: Message) -> Ciphertext {
        assert_ne!(
            self.0,
            Flaw::Randomized,
            "randomized stub has no deterministic encryption"
        );
        self.enc(sk, m, &mut rand::rngs::mock::StepRng::new(0, 0))
    }
}

/// Reads the plaintext of a stub ciphertext without a key.
pub fn plain_value(c: &Ciphertext) -> Option<u64> {
    let (_, b) = c.frame(VERSION)?;
    Some(u64::from_be_bytes(b.get(8..16)?.try_into().ok()?))
}

pub fn msg(v: u64, ell: u8) -> Message {
    Message::new(v, ell).unwrap()
}
