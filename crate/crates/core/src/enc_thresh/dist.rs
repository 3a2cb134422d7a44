//! Example distributions.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::Example;
use crate::error::{Error, Result};
use crate::ore::correctness::random_message;
use crate::ore::{domain_size, FuzzSampler, KeyMaterial, Message, MutationClass, OreScheme};
use crate::rng::{bernoulli, fresh_seed, uniform_below, uniform_in};

pub trait ExampleDistribution<S: OreScheme>: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, scheme: &S, rng: &mut dyn RngCore) -> Example<S>;

    /// The support with weights, when finite.
    fn finite(&self) -> Option<&FiniteDistribution<S>> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Malformed,
    #[serde(rename = "wrongparams")]
    WrongParams,
    #[serde(rename = "pointmass")]
    PointMass,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 4] = [
        DistributionKind::Uniform,
        DistributionKind::Malformed,
        DistributionKind::WrongParams,
        DistributionKind::PointMass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::Malformed => "malformed",
            DistributionKind::WrongParams => "wrongparams",
            DistributionKind::PointMass => "pointmass",
        }
    }

    /// Builds the distribution family around the keys of a concept. Extra keys
    /// for the wrong-parameter families are drawn from `rng`.
    pub fn build<S: OreScheme + 'static>(
        self,
        scheme: &S,
        keys: &Arc<KeyMaterial<S>>,
        rng: &mut dyn RngCore,
    ) -> Result<Box<dyn ExampleDistribution<S>>> {
        Ok(match self {
            DistributionKind::Uniform => Box::new(UniformMessages::new(keys.clone())),
            DistributionKind::Malformed => {
                Box::new(MalformedHeavy::new(keys.clone(), MALFORMED_WEIGHT))
            }
            DistributionKind::WrongParams => {
                let others = other_keys(scheme, keys, WRONG_PARAMS_KEYS, rng)?;
                Box::new(WrongParamsHeavy::new(
                    keys.clone(),
                    others,
                    WRONG_PARAMS_WEIGHT,
                ))
            }
            DistributionKind::PointMass => Box::new(FiniteDistribution::point_mass(
                scheme,
                keys,
                POINT_MASS_ATOMS,
                rng,
            )?),
        })
    }
}

pub const MALFORMED_WEIGHT: f64 = 0.6;
pub const WRONG_PARAMS_WEIGHT: f64 = 0.6;
pub const WRONG_PARAMS_KEYS: usize = 3;
pub const POINT_MASS_ATOMS: usize = 8;

fn other_keys<S: OreScheme>(
    scheme: &S,
    keys: &KeyMaterial<S>,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Arc<KeyMaterial<S>>>> {
    (0..count)
        .map(|_| {
            KeyMaterial::generate(scheme, keys.lambda, keys.ell(), fresh_seed(rng)).map(Arc::new)
        })
        .collect()
}

fn honest<S: OreScheme>(
    scheme: &S,
    keys: &KeyMaterial<S>,
    params: &Arc<S::Params>,
    m: Message,
    rng: &mut dyn RngCore,
) -> Example<S> {
    Example {
        params: params.clone(),
        c: scheme.enc(&keys.sk, m, rng),
    }
}

/// `(params, Enc(sk, m))` for uniform `m`.
pub struct UniformMessages<S: OreScheme> {
    keys: Arc<KeyMaterial<S>>,
    params: Arc<S::Params>,
}

impl<S: OreScheme> UniformMessages<S> {
    pub fn new(keys: Arc<KeyMaterial<S>>) -> Self {
        let params = Arc::new(keys.params.clone());
        UniformMessages { keys, params }
    }

    /// Encryption of a uniform message in `[lo, hi)` under the same parameters.
    pub fn sample_in(&self, scheme: &S, lo: u64, hi: u64, rng: &mut dyn RngCore) -> Example<S> {
        let v = uniform_in(rng, lo, hi);
        let m = Message::new(v, self.keys.ell()).expect("inside the domain");
        honest(scheme, &self.keys, &self.params, m, rng)
    }
}

impl<S: OreScheme> ExampleDistribution<S> for UniformMessages<S> {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn sample(&self, scheme: &S, rng: &mut dyn RngCore) -> Example<S> {
        let m = random_message(self.keys.ell(), rng);
        honest(scheme, &self.keys, &self.params, m, rng)
    }
}

/// With probability `weight` a fuzz-mutated ciphertext (bit flip, truncation
/// or random bytes) under the right parameters, otherwise a uniform honest one.
pub struct MalformedHeavy<S: OreScheme> {
    inner: UniformMessages<S>,
    weight: f64,
    fuzz: FuzzSampler,
}

impl<S: OreScheme> MalformedHeavy<S> {
    pub fn new(keys: Arc<KeyMaterial<S>>, weight: f64) -> Self {
        MalformedHeavy {
            inner: UniformMessages::new(keys),
            weight,
            fuzz: FuzzSampler::with_weights([0.0, 1.0, 1.0, 1.0]).expect("valid weights"),
        }
    }
}

impl<S: OreScheme> ExampleDistribution<S> for MalformedHeavy<S> {
    fn name(&self) -> &'static str {
        "malformed"
    }

    fn sample(&self, scheme: &S, rng: &mut dyn RngCore) -> Example<S> {
        if bernoulli(rng, self.weight) {
            let keys = &self.inner.keys;
            let (_, c) = self.fuzz.sample(scheme, &keys.sk, keys.ell(), rng);
            Example {
                params: self.inner.params.clone(),
                c,
            }
        } else {
            self.inner.sample(scheme, rng)
        }
    }
}

/// With probability `weight` an example under one of several unrelated keys,
/// otherwise a uniform honest one.
pub struct WrongParamsHeavy<S: OreScheme> {
    inner: UniformMessages<S>,
    others: Vec<UniformMessages<S>>,
    weight: f64,
}

impl<S: OreScheme> WrongParamsHeavy<S> {
    pub fn new(keys: Arc<KeyMaterial<S>>, others: Vec<Arc<KeyMaterial<S>>>, weight: f64) -> Self {
        WrongParamsHeavy {
            inner: UniformMessages::new(keys),
            others: others.into_iter().map(UniformMessages::new).collect(),
            weight,
        }
    }
}

impl<S: OreScheme> ExampleDistribution<S> for WrongParamsHeavy<S> {
    fn name(&self) -> &'static str {
        "wrongparams"
    }

    fn sample(&self, scheme: &S, rng: &mut dyn RngCore) -> Example<S> {
        if !self.others.is_empty() && bernoulli(rng, self.weight) {
            let k = uniform_in(rng, 0, self.others.len() as u64) as usize;
            let other = &self.others[k];
            if bernoulli(rng, 0.5) {
                other.sample(scheme, rng)
            } else {
                // An honest ciphertext paired with someone else's parameters.
                Example {
                    params: other.params.clone(),
                    c: self.inner.sample(scheme, rng).c,
                }
            }
        } else {
            self.inner.sample(scheme, rng)
        }
    }
}

/// A distribution with finite support.
pub struct FiniteDistribution<S: OreScheme> {
    atoms: Vec<(Example<S>, f64)>,
    cumulative: Vec<f64>,
}

impl<S: OreScheme> FiniteDistribution<S> {
    /// Weights must be nonnegative with a positive sum; they are normalized.
    pub fn new(atoms: Vec<(Example<S>, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
        if atoms.is_empty()
            || atoms.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0))
            || total <= 0.0
        {
            return Err(Error::usage(
                "finite distribution needs nonnegative weights with positive sum",
            ));
        }
        let atoms: Vec<_> = atoms.into_iter().map(|(x, w)| (x, w / total)).collect();
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc
            })
            .collect();
        Ok(FiniteDistribution { atoms, cumulative })
    }

    pub fn atoms(&self) -> &[(Example<S>, f64)] {
        &self.atoms
    }

    /// Uniform over honest encryptions of every message; `ℓ ≤ 20`.
    pub fn all_messages(scheme: &S, keys: &KeyMaterial<S>, rng: &mut dyn RngCore) -> Result<Self> {
        let ell = keys.ell();
        if ell > 20 {
            return Err(Error::usage(format!(
                "full-domain distribution needs ℓ ≤ 20, got {ell}"
            )));
        }
        let params = Arc::new(keys.params.clone());
        let n = domain_size(ell) as u64;
        let w = 1.0 / n as f64;
        let atoms = (0..n)
            .map(|v| {
                let m = Message::new(v, ell).expect("inside the domain");
                (honest(scheme, keys, &params, m, rng), w)
            })
            .collect();
        Self::new(atoms)
    }

    /// `atoms − 2` honest encryptions of random messages, one malformed
    /// ciphertext and one example under unrelated parameters, with random
    /// weights.
    pub fn point_mass(
        scheme: &S,
        keys: &KeyMaterial<S>,
        atoms: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        if atoms < 3 {
            return Err(Error::usage(
                "point-mass distribution needs at least 3 atoms",
            ));
        }
        let ell = keys.ell();
        let params = Arc::new(keys.params.clone());
        let mut out = Vec::with_capacity(atoms);
        for _ in 0..atoms - 2 {
            let m = random_message(ell, rng);
            out.push(honest(scheme, keys, &params, m, rng));
        }
        let fuzz = FuzzSampler::default();
        let bad = fuzz.sample_class(MutationClass::BitFlip, scheme, &keys.sk, ell, rng);
        out.push(Example {
            params: params.clone(),
            c: bad,
        });
        let other = KeyMaterial::generate(scheme, keys.lambda, ell, fresh_seed(rng))?;
        let m = random_message(ell, rng);
        out.push(honest(
            scheme,
            &other,
            &Arc::new(other.params.clone()),
            m,
            rng,
        ));
        let weighted = out
            .into_iter()
            .map(|x| (x, 1.0 + uniform_below(rng, 1 << 20) as f64))
            .collect();
        Self::new(weighted)
    }
}

impl<S: OreScheme> ExampleDistribution<S> for FiniteDistribution<S> {
    fn name(&self) -> &'static str {
        "pointmass"
    }

    fn sample(&self, _scheme: &S, rng: &mut dyn RngCore) -> Example<S> {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.atoms.len() - 1);
        self.atoms[i].0.clone()
    }

    fn finite(&self) -> Option<&FiniteDistribution<S>> {
        Some(self)
    }
}
