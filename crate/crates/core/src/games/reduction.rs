//! Turning a learner that can be traced without example `j*` into a static
//! ORE adversary.
//!
//! The adversary draws `n` uniform messages, sorts them (`m_1 ≤ … ≤ m_n`,
//! `m_0 = 0`, `m_{n+1} = N`) and locates `i*`, the sorted position of the
//! `j*`-th draw. With `B_0 = (m_{i*−1}, m_{i*})` and `B_1 = (m_{i*}, m_{i*+1})`
//! it challenges on
//!
//! ```text
//! left:  m_0, …, m_{i*−1}, x0, x1, m_{i*+1}, …, m_n   x0 < x1 from one random bucket
//! right: m_0, …, m_{i*−1}, y0, y1, m_{i*+1}, …, m_n   y0 ∈ B_0, y1 ∈ B_1
//! ```
//!
//! rebuilds the learner's sample with the `j*`-th example replaced by the
//! encryption of `m_0` labeled 1, and guesses "left" iff the hypothesis agrees
//! on the two challenge ciphertexts. `m_{i*}` itself is never encrypted.

use std::sync::Arc;

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{Adversary, ChallengePair, Guess};
use crate::enc_thresh::{Classifier, LabeledExample, Learner};
use crate::error::{Error, Result};
use crate::ore::{domain_size, Ciphertext, DeterministicOre, OreScheme, PlaintextLen};
use crate::rng::{coin, fresh_seed, uniform_below, Seed};
use crate::strengthen::{split, EscrowCertifier, Strengthened};

/// `Pr[b′ = b]` when the hypothesis answers 1 with probability `p` on `B_0`
/// and `q` on `B_1`: `½ + ½(p − q)²`.
pub fn adversary_success_prob(p: f64, q: f64) -> Result<f64> {
    if !((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q)) {
        return Err(Error::usage(format!(
            "probabilities must lie in [0, 1], got ({p}, {q})"
        )));
    }
    let same_bucket = 0.5 * (p * p + (1.0 - p) * (1.0 - p) + q * q + (1.0 - q) * (1.0 - q));
    let across = 1.0 - p * q - (1.0 - p) * (1.0 - q);
    Ok(0.5 * (same_bucket + across))
}

/// What the adversary hands to its hypothesis source.
pub struct ReductionView<'a, S: OreScheme> {
    /// `S_{−j*}` in draw order.
    pub sample: &'a [LabeledExample<S>],
    pub params: &'a Arc<S::Params>,
    /// `(m_{i*−1}, m_{i*}, m_{i*+1})`.
    pub around: (u64, u64, u128),
}

pub trait HypothesisSource<S: OreScheme>: Send + Sync {
    type H: Classifier<S>;

    fn name(&self) -> String;

    fn hypothesis(&self, scheme: &S, view: &ReductionView<'_, S>, rng: &mut dyn RngCore)
        -> Self::H;
}

/// Runs a learner on `S_{−j*}`.
#[derive(Clone, Copy, Debug)]
pub struct FromLearner<L>(pub L);

impl<S: OreScheme, L: Learner<S>> HypothesisSource<S> for FromLearner<L> {
    type H = L::Output;

    fn name(&self) -> String {
        self.0.name()
    }

    fn hypothesis(
        &self,
        scheme: &S,
        view: &ReductionView<'_, S>,
        rng: &mut dyn RngCore,
    ) -> L::Output {
        self.0.learn(scheme, view.sample, rng)
    }
}

/// Recovers the plaintext of a ciphertext under the given parameters.
pub type PlaintextOracle<S> =
    Arc<dyn Fn(&<S as OreScheme>::Params, &Ciphertext) -> Option<u64> + Send + Sync>;

/// Reads plaintexts through the base key escrowed in the parameters.
pub fn escrow_oracle<B: DeterministicOre + 'static>(
    base: B,
) -> PlaintextOracle<Strengthened<B, EscrowCertifier>> {
    Arc::new(move |params, c| {
        let (inner, _) = split(params.ell(), c)?;
        base.dec(params.vk.leak(), &inner).map(|m| m.value())
    })
}

/// Ignores the sample and answers 1 with probability `p` below `m_{i*}` and
/// `q` above it, with coins derived from the ciphertext.
pub struct SyntheticBuckets<S: OreScheme> {
    pub p: f64,
    pub q: f64,
    oracle: PlaintextOracle<S>,
}

impl<S: OreScheme> SyntheticBuckets<S> {
    pub fn new(p: f64, q: f64, oracle: PlaintextOracle<S>) -> Result<Self> {
        adversary_success_prob(p, q)?;
        Ok(SyntheticBuckets { p, q, oracle })
    }
}

pub struct SyntheticHypothesis<S: OreScheme> {
    p: f64,
    q: f64,
    split_at: u64,
    key: Seed,
    oracle: PlaintextOracle<S>,
}

impl<S: OreScheme> Classifier<S> for SyntheticHypothesis<S> {
    fn predict(&self, _scheme: &S, params: &S::Params, c: &Ciphertext) -> bool {
        let Some(m) = (self.oracle)(params, c) else {
            return false;
        };
        let digest = Sha256::new()
            .chain_update(self.key)
            .chain_update(c.as_bytes())
            .finalize();
        let bits = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));
        let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < if m < self.split_at { self.p } else { self.q }
    }
}

impl<S: OreScheme> HypothesisSource<S> for SyntheticBuckets<S> {
    type H = SyntheticHypothesis<S>;

    fn name(&self) -> String {
        format!("synthetic(p={}, q={})", self.p, self.q)
    }

    fn hypothesis(
        &self,
        _scheme: &S,
        view: &ReductionView<'_, S>,
        rng: &mut dyn RngCore,
    ) -> SyntheticHypothesis<S> {
        SyntheticHypothesis {
            p: self.p,
            q: self.q,
            split_at: view.around.1,
            key: fresh_seed(rng),
            oracle: self.oracle.clone(),
        }
    }
}

/// The reduction adversary for index `j_star` (1-based) and sample size `n`.
pub struct LearnerAdversary<H> {
    pub n: usize,
    pub j_star: usize,
    pub source: H,
    /// Ignore the hypothesis and guess at random.
    pub force_random: bool,
}

impl<H> LearnerAdversary<H> {
    pub fn new(n: usize, j_star: usize, source: H) -> Result<Self> {
        if n == 0 || j_star == 0 || j_star > n {
            return Err(Error::usage(format!(
                "need 1 ≤ j* ≤ n, got j*={j_star}, n={n}"
            )));
        }
        Ok(LearnerAdversary {
            n,
            j_star,
            source,
            force_random: false,
        })
    }
}

/// Per-trial memory of the reduction.
pub struct Plan {
    /// The draws `m′_1, …, m′_n`.
    draws: Vec<u64>,
    /// `m_0, …, m_n`.
    sorted: Vec<u64>,
    /// `π(j)` for `j = 1..=n`, stored at `j − 1`.
    pi: Vec<usize>,
    i_star: usize,
    upper: u128,
}

impl Plan {
    /// Position in the challenge vector of sorted index `i ≠ i*`.
    fn position(&self, i: usize) -> usize {
        if i < self.i_star {
            i
        } else {
            i + 1
        }
    }
}

/// Draws `(x0, x1)` with `x0 < x1` uniformly from the open interval `(a, b)`.
fn two_from(rng: &mut dyn RngCore, a: u128, b: u128) -> Option<(u64, u64)> {
    let size = b.checked_sub(a + 1)?;
    if size < 2 {
        return None;
    }
    let x = a + 1 + uniform_below(rng, size) as u128;
    let y = loop {
        let y = a + 1 + uniform_below(rng, size) as u128;
        if y != x {
            break y;
        }
    };
    Some((x.min(y) as u64, x.max(y) as u64))
}

fn one_from(rng: &mut dyn RngCore, a: u128, b: u128) -> Option<u64> {
    let size = b.checked_sub(a + 1)?;
    (size >= 1).then(|| (a + 1 + uniform_below(rng, size) as u128) as u64)
}

impl<S: OreScheme, H: HypothesisSource<S>> Adversary<S> for LearnerAdversary<H> {
    type State = Option<Plan>;

    fn name(&self) -> String {
        if self.force_random {
            "reduction(random)".into()
        } else {
            format!("reduction({}, j*={})", self.source.name(), self.j_star)
        }
    }

    fn choose_challenge(&self, ell: u8, rng: &mut dyn RngCore) -> (ChallengePair, Option<Plan>) {
        let n_dom = domain_size(ell);
        let draws: Vec<u64> = (0..self.n).map(|_| uniform_below(rng, n_dom)).collect();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&j| draws[j]);
        let mut pi = vec![0; self.n];
        for (i, &j) in order.iter().enumerate() {
            pi[j] = i + 1;
        }
        let mut sorted = Vec::with_capacity(self.n + 1);
        sorted.push(0);
        sorted.extend(order.iter().map(|&j| draws[j]));
        let i_star = pi[self.j_star - 1];
        let lo = sorted[i_star - 1] as u128;
        let mid = sorted[i_star] as u128;
        let hi = if i_star == self.n {
            n_dom
        } else {
            sorted[i_star + 1] as u128
        };
        let mut bounds: Vec<u128> = sorted.iter().map(|&m| m as u128).collect();
        bounds.push(n_dom);
        let well_spaced = bounds.windows(2).all(|w| w[1] > w[0] + 1);

        let chosen = if well_spaced {
            let bucket_hi = coin(rng);
            let left = if bucket_hi {
                two_from(rng, mid, hi)
            } else {
                two_from(rng, lo, mid)
            };
            let right = one_from(rng, lo, mid).zip(one_from(rng, mid, hi));
            left.zip(right)
        } else {
            None
        };
        let Some((left_pair, right_pair)) = chosen else {
            return (ChallengePair::new(vec![0], vec![0]), None);
        };
        let side = |(x, y): (u64, u64)| -> Vec<u64> {
            let mut v = Vec::with_capacity(self.n + 2);
            v.extend_from_slice(&sorted[..i_star]);
            v.push(x);
            v.push(y);
            v.extend_from_slice(&sorted[i_star + 1..]);
            v
        };
        let pair = ChallengePair::new(side(left_pair), side(right_pair));
        let plan = Plan {
            draws,
            sorted,
            pi,
            i_star,
            upper: n_dom,
        };
        (pair, Some(plan))
    }

    fn guess(
        &self,
        scheme: &S,
        plan: Option<Plan>,
        params: &S::Params,
        cts: &[Ciphertext],
        rng: &mut dyn RngCore,
    ) -> Guess {
        let Some(plan) = plan else {
            return Guess::random(rng);
        };
        if self.force_random {
            return Guess::bit(coin(rng));
        }
        let t = plan.upper / 2;
        let params = Arc::new(params.clone());
        let sample: Vec<LabeledExample<S>> = (1..=self.n)
            .map(|j| {
                let (c, label) = if j == self.j_star {
                    (cts[0].clone(), true)
                } else {
                    let i = plan.pi[j - 1];
                    (
                        cts[plan.position(i)].clone(),
                        (plan.draws[j - 1] as u128) < t,
                    )
                };
                LabeledExample {
                    example: crate::enc_thresh::Example {
                        params: params.clone(),
                        c,
                    },
                    label,
                }
            })
            .collect();
        let i = plan.i_star;
        let hi = if i == self.n {
            plan.upper
        } else {
            plan.sorted[i + 1] as u128
        };
        let view = ReductionView {
            sample: &sample,
            params: &params,
            around: (plan.sorted[i - 1], plan.sorted[i], hi),
        };
        let h = self.source.hypothesis(scheme, &view, rng);
        let y0 = h.predict(scheme, &params, &cts[i]);
        let y1 = h.predict(scheme, &params, &cts[i + 1]);
        Guess::bit(y0 != y1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(adversary_success_prob(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(adversary_success_prob(0.75, 0.25).unwrap(), 0.625);
        for p in [0.0, 0.3, 0.5, 1.0] {
            assert!((adversary_success_prob(p, p).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(adversary_success_prob(1.1, 0.0).is_err());
        assert!(adversary_success_prob(0.5, -0.1).is_err());
    }

    #[test]
    fn two_from_is_strict_and_inside() {
        let mut rng = crate::rng::derive_trial_rng(2, 2);
        for _ in 0..1000 {
            let (x, y) = two_from(&mut rng, 10, 13).unwrap();
            assert!(10 < x && x < y && y < 13);
        }
        assert!(two_from(&mut rng, 10, 12).is_none());
        assert!(one_from(&mut rng, 10, 11).is_none());
        assert_eq!(one_from(&mut rng, 10, 12), Some(11));
    }
}
