//! Encrypted thresholds: concepts `f_{t,r}(params, c) = 1` iff `params` are
//! the concept's parameters and `c` decrypts to a message below `t`, the
//! comparator learner, and error measurement.

pub mod dist;
pub mod pac;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::codec::Encodable;
use crate::error::{Error, Result};
use crate::ore::{domain_size, Ciphertext, KeyMaterial, OreScheme};
use crate::rng::uniform_in;

pub use dist::{
    DistributionKind, ExampleDistribution, FiniteDistribution, MalformedHeavy, UniformMessages,
    WrongParamsHeavy,
};

/// An unlabeled example `(params, c)`.
pub struct Example<S: OreScheme> {
    pub params: Arc<S::Params>,
    pub c: Ciphertext,
}

impl<S: OreScheme> Clone for Example<S> {
    fn clone(&self) -> Self {
        Example {
            params: self.params.clone(),
            c: self.c.clone(),
        }
    }
}

impl<S: OreScheme> fmt::Debug for Example<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Example")
            .field("c", &self.c)
            .finish_non_exhaustive()
    }
}

pub struct LabeledExample<S: OreScheme> {
    pub example: Example<S>,
    pub label: bool,
}

impl<S: OreScheme> Clone for LabeledExample<S> {
    fn clone(&self) -> Self {
        LabeledExample {
            example: self.example.clone(),
            label: self.label,
        }
    }
}

impl<S: OreScheme> fmt::Debug for LabeledExample<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LabeledExample")
            .field("example", &self.example)
            .field("label", &self.label)
            .finish()
    }
}

/// The concept `f_{t,r}`: threshold `t ∈ [0, N]` and keys generated from coins `r`.
pub struct EncThreshConcept<S: OreScheme> {
    t: u128,
    keys: Arc<KeyMaterial<S>>,
    params: Arc<S::Params>,
}

impl<S: OreScheme> Clone for EncThreshConcept<S> {
    fn clone(&self) -> Self {
        EncThreshConcept {
            t: self.t,
            keys: self.keys.clone(),
            params: self.params.clone(),
        }
    }
}

impl<S: OreScheme> EncThreshConcept<S> {
    pub fn new(t: u128, keys: Arc<KeyMaterial<S>>) -> Result<Self> {
        let n = domain_size(keys.ell());
        if t > n {
            return Err(Error::usage(format!("threshold {t} outside [0, {n}]")));
        }
        let params = Arc::new(keys.params.clone());
        Ok(EncThreshConcept { t, keys, params })
    }

    pub fn threshold(&self) -> u128 {
        self.t
    }

    pub fn keys(&self) -> &Arc<KeyMaterial<S>> {
        &self.keys
    }

    /// The concept's parameters, shared by every honest example.
    pub fn params(&self) -> &Arc<S::Params> {
        &self.params
    }

    pub fn ell(&self) -> u8 {
        self.keys.ell()
    }

    /// Same keys, different threshold.
    pub fn with_threshold(&self, t: u128) -> Result<Self> {
        EncThreshConcept::new(t, self.keys.clone())
    }

    pub fn eval(&self, scheme: &S, params: &S::Params, c: &Ciphertext) -> bool {
        if *params != self.keys.params {
            return false;
        }
        match scheme.dec(&self.keys.sk, c) {
            Some(m) => (m.value() as u128) < self.t,
            None => false,
        }
    }

    pub fn evaluate(&self, scheme: &S, x: &Example<S>) -> bool {
        self.eval(scheme, &x.params, &x.c)
    }

    pub fn label(&self, scheme: &S, x: Example<S>) -> LabeledExample<S> {
        let label = self.evaluate(scheme, &x);
        LabeledExample { example: x, label }
    }
}

/// A hypothesis over examples.
pub trait Classifier<S: OreScheme>: Send + Sync {
    fn predict(&self, scheme: &S, params: &S::Params, c: &Ciphertext) -> bool;

    fn predict_example(&self, scheme: &S, x: &Example<S>) -> bool {
        self.predict(scheme, &x.params, &x.c)
    }
}

pub trait Learner<S: OreScheme>: Send + Sync {
    type Output: Classifier<S>;

    fn name(&self) -> String;

    fn learn(
        &self,
        scheme: &S,
        sample: &[LabeledExample<S>],
        rng: &mut dyn RngCore,
    ) -> Self::Output;
}

/// `h(params, c) = 1` iff `params = params*` and `Comp(params*, c, anchor) ∈ {<, =}`.
pub struct Comparator<S: OreScheme> {
    params: Arc<S::Params>,
    anchor: Ciphertext,
    anchor_admitted: bool,
}

impl<S: OreScheme> Clone for Comparator<S> {
    fn clone(&self) -> Self {
        Comparator {
            params: self.params.clone(),
            anchor: self.anchor.clone(),
            anchor_admitted: self.anchor_admitted,
        }
    }
}

impl<S: OreScheme> Comparator<S> {
    pub fn new(scheme: &S, params: Arc<S::Params>, anchor: Ciphertext) -> Self {
        // Comp checks each argument independently, so the anchor's check can
        // be done once here instead of on every evaluation.
        let anchor_admitted = scheme.admits(&params, &anchor);
        Comparator {
            params,
            anchor,
            anchor_admitted,
        }
    }

    pub fn params(&self) -> &Arc<S::Params> {
        &self.params
    }

    pub fn anchor(&self) -> &Ciphertext {
        &self.anchor
    }
}

impl<S: OreScheme> Classifier<S> for Comparator<S> {
    fn predict(&self, scheme: &S, params: &S::Params, c: &Ciphertext) -> bool {
        if !(std::ptr::eq(params, &*self.params) || *params == *self.params) {
            return false;
        }
        self.anchor_admitted
            && scheme.admits(params, c)
            && scheme.comp_admitted(params, c, &self.anchor).is_at_most()
    }
}

/// Output of the encrypted-threshold learners.
pub enum EncHypothesis<S: OreScheme> {
    AllZeroes,
    Comparator(Comparator<S>),
}

impl<S: OreScheme> Clone for EncHypothesis<S> {
    fn clone(&self) -> Self {
        match self {
            EncHypothesis::AllZeroes => EncHypothesis::AllZeroes,
            EncHypothesis::Comparator(c) => EncHypothesis::Comparator(c.clone()),
        }
    }
}

impl<S: OreScheme> fmt::Debug for EncHypothesis<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncHypothesis::AllZeroes => f.write_str("AllZeroes"),
            EncHypothesis::Comparator(c) => write!(f, "Comparator({:?})", c.anchor),
        }
    }
}

/// Serializable hypothesis description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisDescription {
    AllZeroes,
    Comparator { params: String, anchor: Ciphertext },
}

impl<S: OreScheme> EncHypothesis<S> {
    pub fn describe(&self) -> HypothesisDescription {
        match self {
            EncHypothesis::AllZeroes => HypothesisDescription::AllZeroes,
            EncHypothesis::Comparator(c) => HypothesisDescription::Comparator {
                params: hex::encode(c.params.to_bytes()),
                anchor: c.anchor.clone(),
            },
        }
    }

    pub fn is_all_zeroes(&self) -> bool {
        matches!(self, EncHypothesis::AllZeroes)
    }
}

impl<S: OreScheme> Classifier<S> for EncHypothesis<S> {
    fn predict(&self, scheme: &S, params: &S::Params, c: &Ciphertext) -> bool {
        match self {
            EncHypothesis::AllZeroes => false,
            EncHypothesis::Comparator(h) => h.predict(scheme, params, c),
        }
    }
}

/// `n = ⌈ln(1/β)/α⌉`.
pub fn required_sample_size(alpha: f64, beta: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::usage(format!(
            "need 0 < α, β < 1, got α={alpha}, β={beta}"
        )));
    }
    let x = (1.0 / beta).ln() / alpha;
    // Values within rounding noise of an integer are that integer.
    let r = x.round();
    let n = if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x.ceil()
    };
    Ok(n.max(1.0) as usize)
}

/// The comparator learner: anchor at the largest positive example under the
/// parameters of the first positive example.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComparatorLearner;

impl<S: OreScheme> Learner<S> for ComparatorLearner {
    type Output = EncHypothesis<S>;

    fn name(&self) -> String {
        "comparator".into()
    }

    fn learn(
        &self,
        scheme: &S,
        sample: &[LabeledExample<S>],
        _rng: &mut dyn RngCore,
    ) -> EncHypothesis<S> {
        let Some(first) = sample.iter().find(|s| s.label) else {
            return EncHypothesis::AllZeroes;
        };
        let params = first.example.params.clone();
        let mut best: Option<&Ciphertext> = None;
        for s in sample {
            if !s.label || *s.example.params != *params {
                continue;
            }
            best = Some(match best {
                None => &s.example.c,
                // Replace only on a strict ">" so ⊥ and ties keep the incumbent.
                Some(cur) => {
                    if scheme.comp(&params, &s.example.c, cur)
                        == crate::ore::CompareResult::Ordered(crate::ore::Ordering3::Gt)
                    {
                        &s.example.c
                    } else {
                        cur
                    }
                }
            });
        }
        let anchor = best.expect("G contains the first positive").clone();
        EncHypothesis::Comparator(Comparator::new(scheme, params, anchor))
    }
}

/// Always outputs the all-zeroes hypothesis.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroLearner;

impl<S: OreScheme> Learner<S> for ZeroLearner {
    type Output = EncHypothesis<S>;

    fn name(&self) -> String {
        "all_zeroes".into()
    }

    fn learn(
        &self,
        _scheme: &S,
        _sample: &[LabeledExample<S>],
        _rng: &mut dyn RngCore,
    ) -> EncHypothesis<S> {
        EncHypothesis::AllZeroes
    }
}

/// Anchors a comparator at one uniformly chosen sample element, whatever its label.
#[derive(Clone, Copy, Debug, Default)]
pub struct MemorizeOneLearner;

impl<S: OreScheme> Learner<S> for MemorizeOneLearner {
    type Output = EncHypothesis<S>;

    fn name(&self) -> String {
        "memorize_one".into()
    }

    fn learn(
        &self,
        scheme: &S,
        sample: &[LabeledExample<S>],
        rng: &mut dyn RngCore,
    ) -> EncHypothesis<S> {
        if sample.is_empty() {
            return EncHypothesis::AllZeroes;
        }
        let pick = &sample[uniform_in(rng, 0, sample.len() as u64) as usize].example;
        EncHypothesis::Comparator(Comparator::new(scheme, pick.params.clone(), pick.c.clone()))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub samples: usize,
    pub disagreements: usize,
    /// Points where the hypothesis says 1 and the concept says 0.
    pub one_sided_violations: usize,
    pub rate: f64,
    /// True when computed exactly from a finite support rather than sampled.
    pub exact: bool,
}

/// Fraction of fresh draws from `dist` on which `h` and the concept disagree.
pub fn empirical_error<S: OreScheme, H: Classifier<S> + ?Sized>(
    scheme: &S,
    h: &H,
    concept: &EncThreshConcept<S>,
    dist: &dyn ExampleDistribution<S>,
    samples: usize,
    rng: &mut dyn RngCore,
) -> Result<ErrorEstimate> {
    if samples == 0 {
        return Err(Error::usage("empirical error needs at least one sample"));
    }
    let mut est = ErrorEstimate {
        samples,
        ..Default::default()
    };
    for _ in 0..samples {
        let x = dist.sample(scheme, rng);
        let truth = concept.evaluate(scheme, &x);
        let guess = h.predict_example(scheme, &x);
        if truth != guess {
            est.disagreements += 1;
            if guess {
                est.one_sided_violations += 1;
            }
        }
    }
    est.rate = est.disagreements as f64 / samples as f64;
    Ok(est)
}

/// Exact error over a finite distribution: the total weight of disagreements.
pub fn exact_error<S: OreScheme, H: Classifier<S> + ?Sized>(
    scheme: &S,
    h: &H,
    concept: &EncThreshConcept<S>,
    dist: &FiniteDistribution<S>,
) -> ErrorEstimate {
    let mut est = ErrorEstimate {
        samples: dist.atoms().len(),
        exact: true,
        ..Default::default()
    };
    for (x, w) in dist.atoms() {
        let truth = concept.evaluate(scheme, x);
        let guess = h.predict_example(scheme, x);
        if truth != guess {
            est.disagreements += 1;
            est.rate += w;
            if guess {
                est.one_sided_violations += 1;
            }
        }
    }
    est
}

/// Exact error when `dist` has finite support, otherwise `samples` fresh draws.
pub fn generalization_error<S: OreScheme, H: Classifier<S> + ?Sized>(
    scheme: &S,
    h: &H,
    concept: &EncThreshConcept<S>,
    dist: &dyn ExampleDistribution<S>,
    samples: usize,
    rng: &mut dyn RngCore,
) -> Result<ErrorEstimate> {
    match dist.finite() {
        Some(f) => Ok(exact_error(scheme, h, concept, f)),
        None => empirical_error(scheme, h, concept, dist, samples, rng),
    }
}

/// Draws `n` i.i.d. examples from `dist` labeled by `concept`.
pub fn draw_sample<S: OreScheme>(
    scheme: &S,
    concept: &EncThreshConcept<S>,
    dist: &dyn ExampleDistribution<S>,
    n: usize,
    rng: &mut dyn RngCore,
) -> Vec<LabeledExample<S>> {
    (0..n)
        .map(|_| concept.label(scheme, dist.sample(scheme, rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_sizes() {
        assert_eq!(required_sample_size(0.05, 0.05).unwrap(), 60);
        assert_eq!(required_sample_size(0.5, (-1.0f64).exp()).unwrap(), 2);
        assert_eq!(required_sample_size(0.1, 0.01).unwrap(), 47);
        assert!(required_sample_size(0.0, 0.5).is_err());
        assert!(required_sample_size(0.5, 1.0).is_err());
    }
}
