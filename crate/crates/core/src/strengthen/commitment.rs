//! Hash-based commitments: `Com(v; r) = SHA-256(domain ‖ r ‖ |v| ‖ v)`.
//!
//! Binding rests on collision resistance, so it is computational in general.
//! `binding_check` searches small domains exhaustively for collisions.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DOMAIN: &[u8] = b"ore-learn/commit/v1";
pub const MAX_BINDING_VALUES: usize = 1 << 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment(pub [u8; 32]);

impl fmt::Debug for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Commitment({})", hex::encode(self.0))
    }
}

pub fn commit(value: &[u8], randomness: &[u8; 32]) -> Commitment {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(randomness);
    h.update((value.len() as u64).to_be_bytes());
    h.update(value);
    Commitment(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub value_a: String,
    pub value_b: String,
    pub randomness_a: String,
    pub randomness_b: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingReport {
    pub values: usize,
    pub randomness: usize,
    pub commitments: usize,
    pub collisions: Vec<Collision>,
}

impl BindingReport {
    pub fn passed(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Commits to every (value, randomness) combination and reports any two
/// distinct values that share a commitment.
pub fn binding_check(values: &[Vec<u8>], randomness: &[[u8; 32]]) -> Result<BindingReport> {
    if values.len() > MAX_BINDING_VALUES {
        return Err(Error::usage(format!(
            "binding check limited to {MAX_BINDING_VALUES} values, got {}",
            values.len()
        )));
    }
    let mut seen: HashMap<Commitment, (usize, usize)> =
        HashMap::with_capacity(values.len() * randomness.len());
    let mut report = BindingReport {
        values: values.len(),
        randomness: randomness.len(),
        ..Default::default()
    };
    for (vi, v) in values.iter().enumerate() {
        for (ri, r) in randomness.iter().enumerate() {
            let c = commit(v, r);
            report.commitments += 1;
            match seen.get(&c) {
                Some(&(vj, rj)) if values[vj] != *v => report.collisions.push(Collision {
                    value_a: hex::encode(&values[vj]),
                    value_b: hex::encode(v),
                    randomness_a: hex::encode(randomness[rj]),
                    randomness_b: hex::encode(r),
                }),
                Some(_) => {}
                None => {
                    seen.insert(c, (vi, ri));
                }
            }
        }
    }
    Ok(report)
}
