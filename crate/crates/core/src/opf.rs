//! A weakly correct ORE built from a keyed order-preserving tag and an
//! authenticated deterministic payload.
//!
//! Ciphertext layout (all integers big-endian):
//!
//! ```text
//! 0x01 ‖ ℓ ‖ tag (⌈3ℓ/8⌉ bytes) ‖ masked message (⌈ℓ/8⌉ bytes) ‖ auth (16 bytes)
//! ```
//!
//! The tag is produced by binary descent over the plaintext domain. The tag
//! range `[0, 2^{3ℓ})` is split once per level at a pseudorandom point in the
//! middle half of the current interval; the left child keeps the lower part.
//! Every interval keeps at least a quarter of its parent, so after ℓ levels
//! each leaf still holds at least one tag value and the map is strictly
//! monotone.
//!
//! The payload is SIV-style: `auth = F_mac(m)` and the message is masked with
//! `F_mask(auth)`. Decryption unmasks, recomputes `auth` and also checks the
//! tag against the recomputed tag of the message.
//!
//! Comparison reads tags only. It is correct on honest ciphertexts but says
//! nothing useful about a ciphertext whose tag and payload disagree, which is
//! exactly the gap the strengthening transformation closes.

use std::cell::Cell;

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use rand::RngCore;
use sha2::{Digest, Sha256};
use smallvec::SmallVec;

use crate::codec::Encodable;
use crate::error::{Error, Result};
use crate::ore::{
    domain_size, Ciphertext, CompareResult, DeterministicOre, Message, Ordering3, OreScheme,
    PlaintextLen,
};

pub const VERSION: u8 = 0x01;
/// Largest plaintext length whose 3ℓ-bit tags fit in a `u128`.
pub const MAX_OPF_ELL: u8 = 42;
const AUTH_LEN: usize = 16;

pub fn tag_len(ell: u8) -> usize {
    (3 * ell as usize).div_ceil(8)
}

pub fn payload_len(ell: u8) -> usize {
    (ell as usize).div_ceil(8)
}

pub fn body_len(ell: u8) -> usize {
    tag_len(ell) + payload_len(ell) + AUTH_LEN
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OpfOre;

#[derive(Clone)]
pub struct OpfKey {
    ell: u8,
    seed: [u8; 32],
    tag_prf: Aes128,
    mac: Aes128,
    mask: Aes128,
}

impl OpfKey {
    fn from_seed(ell: u8, seed: [u8; 32]) -> Self {
        OpfKey {
            ell,
            seed,
            tag_prf: subkey(b"tag", &seed),
            mac: subkey(b"mac", &seed),
            mask: subkey(b"mask", &seed),
        }
    }
}

impl std::fmt::Debug for OpfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpfKey")
            .field("ell", &self.ell)
            .finish_non_exhaustive()
    }
}

fn subkey(label: &[u8], seed: &[u8; 32]) -> Aes128 {
    let mut h = Sha256::new();
    h.update(b"ore-learn/opf/");
    h.update(label);
    h.update(seed);
    let d = h.finalize();
    Aes128::new(GenericArray::from_slice(&d[..16]))
}

impl PlaintextLen for OpfKey {
    fn ell(&self) -> u8 {
        self.ell
    }
}

impl Encodable for OpfKey {
    fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(33);
        v.push(self.ell);
        v.extend_from_slice(&self.seed);
        v
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let (&ell, seed) = bytes.split_first()?;
        if ell == 0 || ell > MAX_OPF_ELL {
            return None;
        }
        Some(OpfKey::from_seed(ell, seed.try_into().ok()?))
    }
}

/// Public parameters: ℓ and a random instance identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpfParams {
    ell: u8,
    instance: [u8; 16],
}

impl PlaintextLen for OpfParams {
    fn ell(&self) -> u8 {
        self.ell
    }
}

impl Encodable for OpfParams {
    fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(17);
        v.push(self.ell);
        v.extend_from_slice(&self.instance);
        v
    }

    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let (&ell, instance) = bytes.split_first()?;
        if ell == 0 || ell > MAX_OPF_ELL {
            return None;
        }
        Some(OpfParams {
            ell,
            instance: instance.try_into().ok()?,
        })
    }
}

fn block(tag: u8, ell: u8, level: u8, word: u64) -> [u8; 16] {
    let mut b = [0u8; 16];
    b[0] = tag;
    b[1] = ell;
    b[2] = level;
    b[8..].copy_from_slice(&word.to_be_bytes());
    b
}

/// Order tag of `m` under `sk`: strictly increasing in `m`, below `2^{3ℓ}`.
///
/// At level `k` the interval `[lo, hi)` of width `w` is split at
/// `lo + ⌊w/4⌋ + o`, where `o` is the top `3ℓ−2k−1` bits of the level's PRF
/// block. Both children keep at least `⌊w/4⌋`, so `w ≥ 2^{3ℓ−2k}` at level
/// `k` by induction, hence `o < w/2` and the split lies in the middle half.
pub fn opf_tag(sk: &OpfKey, m: Message) -> u128 {
    // Encrypting and then checking the same message recomputes the same tag;
    // remember the last one per thread.
    let v = m.value();
    let hit = LAST_TAG
        .with(Cell::get)
        .and_then(|(seed, ell, last_v, tag)| {
            (last_v == v && ell == sk.ell && seed == sk.seed).then_some(tag)
        });
    if let Some(tag) = hit {
        return tag;
    }
    let tag = compute_tag(sk, m);
    LAST_TAG.with(|c| c.set(Some((sk.seed, sk.ell, v, tag))));
    tag
}

thread_local! {
    static LAST_TAG: Cell<Option<([u8; 32], u8, u64, u128)>> = const { Cell::new(None) };
}

fn compute_tag(sk: &OpfKey, m: Message) -> u128 {
    let ell = sk.ell;
    debug_assert_eq!(m.ell(), ell);
    let v = m.value();
    // One PRF block per level, keyed by the level and the path prefix above it.
    let mut blocks = [GenericArray::from([0u8; 16]); MAX_OPF_ELL as usize];
    let head = ((b'T' as u128) << 120) | ((ell as u128) << 112);
    for k in 0..ell {
        let prefix = (v >> (ell - k)) as u128;
        blocks[k as usize] =
            GenericArray::from((head | ((k as u128) << 104) | prefix).to_be_bytes());
    }
    let blocks = &mut blocks[..ell as usize];
    sk.tag_prf.encrypt_blocks(blocks);

    let mut lo: u128 = 0;
    let mut hi: u128 = 1u128 << (3 * ell as u32);
    let top = 3 * ell as u32;
    for (k, b) in blocks.iter().enumerate() {
        let w = hi - lo;
        debug_assert!(w >= 1u128 << (top - 2 * k as u32));
        let offset = u128::from_be_bytes((*b).into()) >> (129 - top + 2 * k as u32);
        let split = lo + (w >> 2) + offset;
        // Branch-free select: the path bits are secret and unpredictable.
        let go_right = (((v >> (ell as usize - 1 - k)) & 1) as u128).wrapping_neg();
        lo = (split & go_right) | (lo & !go_right);
        hi = (hi & go_right) | (split & !go_right);
    }
    debug_assert!(hi > lo);
    lo
}

fn auth_of(sk: &OpfKey, m: Message) -> [u8; 16] {
    let mut b = GenericArray::from(block(b'A', sk.ell, 0, m.value()));
    sk.mac.encrypt_block(&mut b);
    b.into()
}

fn mask_of(sk: &OpfKey, auth: &[u8; 16]) -> [u8; 16] {
    let mut b = GenericArray::clone_from_slice(auth);
    sk.mask.encrypt_block(&mut b);
    b.into()
}

fn put_tag(out: &mut SmallVec<[u8; 64]>, ell: u8, tag: u128) {
    out.extend_from_slice(&tag.to_be_bytes()[16 - tag_len(ell)..]);
}

fn assemble(sk: &OpfKey, tag: u128, payload_msg: Message) -> Ciphertext {
    let ell = sk.ell;
    let n = payload_len(ell);
    let auth = auth_of(sk, payload_msg);
    let mask = mask_of(sk, &auth);
    let mut out: SmallVec<[u8; 64]> = SmallVec::with_capacity(2 + body_len(ell));
    out.push(VERSION);
    out.push(ell);
    put_tag(&mut out, ell, tag);
    let value = payload_msg.value().to_be_bytes();
    out.extend(value[8 - n..].iter().zip(mask).map(|(a, b)| a ^ b));
    out.extend_from_slice(&auth);
    Ciphertext::from_bytes(out)
}

/// Splits an OPF ciphertext for plaintext length `ell` into its parts.
fn parse(ell: u8, c: &Ciphertext) -> Option<(u128, &[u8], &[u8])> {
    let (cell, body) = c.frame(VERSION)?;
    if cell != ell || body.len() != body_len(ell) {
        return None;
    }
    let (tag, rest) = body.split_at(tag_len(ell));
    let (masked, auth) = rest.split_at(payload_len(ell));
    let mut t = [0u8; 16];
    t[16 - tag.len()..].copy_from_slice(tag);
    Some((u128::from_be_bytes(t), masked, auth))
}

/// Reads the order tag of a structurally valid ciphertext.
pub fn read_tag(ell: u8, c: &Ciphertext) -> Option<u128> {
    parse(ell, c).map(|(t, _, _)| t)
}

/// The masked payload bytes of a structurally valid ciphertext.
pub fn read_payload(ell: u8, c: &Ciphertext) -> Option<&[u8]> {
    parse(ell, c).map(|(_, masked, _)| masked)
}

/// A ciphertext carrying the tag of `tag_of` and the authenticated payload
/// of `payload_of`. Comparison follows the tag while decryption rejects it,
/// which breaks strong correctness whenever the two disagree.
pub fn forge_spliced(sk: &OpfKey, tag_of: Message, payload_of: Message) -> Ciphertext {
    assemble(sk, opf_tag(sk, tag_of), payload_of)
}

impl OreScheme for OpfOre {
    type SecretKey = OpfKey;
    type Params = OpfParams;

    fn name(&self) -> String {
        "opf".into()
    }

    fn gen(&self, _lambda: u32, ell: u8, rng: &mut dyn RngCore) -> Result<(OpfKey, OpfParams)> {
        if ell == 0 || ell > MAX_OPF_ELL {
            return Err(Error::usage(format!(
                "opf scheme supports 1 ≤ ℓ ≤ {MAX_OPF_ELL}, got {ell}"
            )));
        }
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        let mut instance = [0u8; 16];
        rng.fill_bytes(&mut instance);
        Ok((OpfKey::from_seed(ell, seed), OpfParams { ell, instance }))
    }

    fn enc(&self, sk: &OpfKey, m: Message, _rng: &mut dyn RngCore) -> Ciphertext {
        self.enc_det(sk, m)
    }

    fn dec(&self, sk: &OpfKey, c: &Ciphertext) -> Option<Message> {
        let ell = sk.ell;
        let (tag, masked, auth) = parse(ell, c)?;
        let auth: [u8; 16] = auth.try_into().ok()?;
        let mask = mask_of(sk, &auth);
        let mut v = [0u8; 8];
        for (i, (a, b)) in masked.iter().zip(mask).enumerate() {
            v[8 - masked.len() + i] = a ^ b;
        }
        let v = u64::from_be_bytes(v);
        if (v as u128) >= domain_size(ell) {
            return None;
        }
        let m = Message::new(v, ell).ok()?;
        if auth_of(sk, m) != auth || opf_tag(sk, m) != tag {
            return None;
        }
        Some(m)
    }

    fn admits(&self, params: &OpfParams, c: &Ciphertext) -> bool {
        parse(params.ell, c).is_some()
    }

    fn comp_admitted(&self, params: &OpfParams, c0: &Ciphertext, c1: &Ciphertext) -> CompareResult {
        match (read_tag(params.ell, c0), read_tag(params.ell, c1)) {
            (Some(a), Some(b)) => Ordering3::from(a.cmp(&b)).into(),
            _ => CompareResult::Bot,
        }
    }

    fn params_len(&self, _ell: u8) -> usize {
        17
    }
}

impl DeterministicOre for OpfOre {
    fn enc_det(&self, sk: &OpfKey, m: Message) -> Ciphertext {
        assemble(sk, opf_tag(sk, m), m)
    }

    // A ciphertext that decrypts has exact length, a tag equal to the
    // recomputed tag, and a payload whose unmasked value and auth both match
    // the plaintext, so it already equals the honest encryption byte for byte.
    fn is_canonical(&self, sk: &OpfKey, c: &Ciphertext) -> bool {
        self.dec(sk, c).is_some()
    }
}
