//! Example reidentification for encrypted thresholds.
//!
//! `gen_ex` fixes `t = N/2`, generates keys, and encrypts `n` uniform draws
//! `m′_1, …, m′_n`. Sorted, they cut the domain into buckets
//! `B_i = [m_i, m_{i+1})` for `i = 0..=n` with `m_0 = 0`, `m_{n+1} = N`.
//! `trace_ex` estimates `p_i`, the rate at which a hypothesis accepts fresh
//! encryptions from `B_i`, and accuses the draw behind the least `i ≥ 1` with
//! `p̂_{i−1} − p̂_i ≥ γ/n`.
//!
//! Each bucket's estimate draws from its own stream, so a trace may stop at
//! the first accusation without changing its verdict.

use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enc_thresh::{
    generalization_error, Classifier, EncThreshConcept, Example, LabeledExample, Learner,
    UniformMessages,
};
use crate::error::{Error, Result};
use crate::ore::{domain_size, KeyMaterial, Message, OreScheme};
use crate::rng::{derive_stream, derive_trial_rng, fresh_seed, uniform_below, Seed};
use crate::stats::Proportion;

/// `K = ⌈(8n²/γ²)·ln(9n/ξ)⌉`.
pub fn k_for(n: usize, gamma: f64, xi: f64) -> Result<u64> {
    check_gamma_xi(gamma, xi)?;
    if n == 0 {
        return Err(Error::usage("n must be positive"));
    }
    let n = n as f64;
    let x = 8.0 * n * n / (gamma * gamma) * (9.0 * n / xi).ln();
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x.ceil()
    };
    Ok(k as u64)
}

fn check_gamma_xi(gamma: f64, xi: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 0.5 && xi > 0.0 && xi < 1.0) {
        return Err(Error::usage(format!(
            "need 0 < γ ≤ 1/2 and 0 < ξ < 1, got γ={gamma}, ξ={xi}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KMode {
    Full,
    /// `min(K, cap)` samples per bucket; does not meet the estimator's
    /// guarantee and is labeled as such in reports.
    Reduced {
        cap: u64,
    },
}

impl KMode {
    pub const DEFAULT_CAP: u64 = 100_000;

    pub fn reduced() -> Self {
        KMode::Reduced {
            cap: Self::DEFAULT_CAP,
        }
    }

    pub fn samples(self, k: u64) -> u64 {
        match self {
            KMode::Full => k,
            KMode::Reduced { cap } => k.min(cap),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    pub gamma: f64,
    pub xi: f64,
    pub k_mode: KMode,
    /// Stop estimating at the first accusation.
    pub lazy: bool,
}

impl TraceSettings {
    pub fn new(gamma: f64, xi: f64, k_mode: KMode) -> Result<Self> {
        check_gamma_xi(gamma, xi)?;
        Ok(TraceSettings {
            gamma,
            xi,
            k_mode,
            lazy: true,
        })
    }
}

/// Shared state of `gen_ex` and `trace_ex`.
pub struct ReidentState<S: OreScheme> {
    pub concept: EncThreshConcept<S>,
    /// `m′_1, …, m′_n` in draw order.
    pub draws: Vec<u64>,
    /// `m_0, …, m_{n+1}`.
    pub bounds: Vec<u128>,
    /// Draw index (1-based) of sorted position `i`, stored at `i − 1`.
    pub draw_of: Vec<usize>,
    pub sample: Vec<LabeledExample<S>>,
    /// `x_0`, the encryption of `m_0`, labeled 1.
    pub junk: LabeledExample<S>,
    pub well_spaced: bool,
}

impl<S: OreScheme> ReidentState<S> {
    pub fn n(&self) -> usize {
        self.draws.len()
    }

    /// `S_{−j}`: the sample with example `j` (1-based) replaced by `x_0`.
    pub fn sample_without(&self, j: usize) -> Result<Vec<LabeledExample<S>>> {
        if j == 0 || j > self.n() {
            return Err(Error::usage(format!("index {j} outside [1, {}]", self.n())));
        }
        let mut s = self.sample.clone();
        s[j - 1] = self.junk.clone();
        Ok(s)
    }

    /// `[m_i, m_{i+1})`.
    pub fn bucket(&self, i: usize) -> (u128, u128) {
        (self.bounds[i], self.bounds[i + 1])
    }

    pub fn bucket_is_empty(&self, i: usize) -> bool {
        self.bounds[i] >= self.bounds[i + 1]
    }

    /// Whether `n² ≥ N/100`, where collisions start to matter.
    pub fn crowded(&self) -> bool {
        let n = self.n() as u128;
        n * n * 100 >= domain_size(self.concept.ell())
    }
}

pub fn gen_ex<S: OreScheme>(
    scheme: &S,
    lambda: u32,
    n: usize,
    ell: u8,
    rng: &mut dyn RngCore,
) -> Result<ReidentState<S>> {
    if n == 0 {
        return Err(Error::usage("n must be positive"));
    }
    let keys = Arc::new(KeyMaterial::sample(scheme, lambda, ell, rng)?);
    let big_n = domain_size(ell);
    let concept = EncThreshConcept::new(big_n / 2, keys.clone())?;
    let params = concept.params().clone();
    let draws: Vec<u64> = (0..n).map(|_| uniform_below(rng, big_n)).collect();
    let sample = draws
        .iter()
        .map(|&v| {
            let m = Message::new(v, ell).expect("inside the domain");
            let example = Example {
                params: params.clone(),
                c: scheme.enc(&keys.sk, m, rng),
            };
            LabeledExample {
                label: (v as u128) < concept.threshold(),
                example,
            }
        })
        .collect();
    let junk = LabeledExample {
        example: Example {
            params: params.clone(),
            c: scheme.enc(&keys.sk, Message::new(0, ell).expect("zero"), rng),
        },
        label: true,
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| draws[j]);
    let mut bounds = Vec::with_capacity(n + 2);
    bounds.push(0);
    bounds.extend(order.iter().map(|&j| draws[j] as u128));
    bounds.push(big_n);
    let well_spaced = bounds.windows(2).all(|w| w[1] > w[0] + 1);
    let draw_of = order.iter().map(|&j| j + 1).collect();
    let state = ReidentState {
        concept,
        draws,
        bounds,
        draw_of,
        sample,
        junk,
        well_spaced,
    };
    if state.crowded() {
        log::warn!("n = {n} is large for ℓ = {ell}; draws may collide");
    }
    Ok(state)
}

/// Mean of `h` over `k` fresh encryptions of uniform messages from a nonempty
/// bucket.
pub fn estimate_bucket<S: OreScheme, H: Classifier<S> + ?Sized>(
    scheme: &S,
    state: &ReidentState<S>,
    h: &H,
    i: usize,
    k: u64,
    rng: &mut dyn RngCore,
) -> f64 {
    let (lo, hi) = state.bucket(i);
    debug_assert!(lo < hi);
    let keys = state.concept.keys();
    let params = state.concept.params();
    let ell = keys.ell();
    let mut hits = 0u64;
    for _ in 0..k {
        let v = (lo + uniform_below(rng, hi - lo) as u128) as u64;
        let c = scheme.enc(
            &keys.sk,
            Message::new(v, ell).expect("inside the domain"),
            rng,
        );
        hits += h.predict(scheme, params, &c) as u64;
    }
    hits as f64 / k as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceVerdict {
    /// Accused draw index in `1..=n`.
    pub accused: Option<usize>,
    /// Sorted position of the accused draw.
    pub accused_bucket: Option<usize>,
    /// `p̂_0, p̂_1, …` up to where estimation stopped.
    pub estimates: Vec<f64>,
    pub k: u64,
    pub k_used: u64,
    pub k_reduced: bool,
    /// Some bucket was empty and borrowed a neighbour's estimate.
    pub degraded: bool,
}

/// The least `i ≥ 1` with `p̂_{i−1} − p̂_i ≥ threshold`.
pub fn first_gap(estimates: &[f64], threshold: f64) -> Option<usize> {
    (1..estimates.len()).find(|&i| estimates[i - 1] - estimates[i] >= threshold)
}

pub fn trace_ex<S: OreScheme, H: Classifier<S> + ?Sized>(
    scheme: &S,
    state: &ReidentState<S>,
    h: &H,
    settings: &TraceSettings,
    coins: &Seed,
) -> Result<TraceVerdict> {
    let n = state.n();
    let k = k_for(n, settings.gamma, settings.xi)?;
    let k_used = settings.k_mode.samples(k);
    let threshold = settings.gamma / n as f64;
    let buckets = n + 1;
    let mut cache: Vec<Option<f64>> = vec![None; buckets];
    let mut degraded = false;

    let raw = |i: usize, cache: &mut Vec<Option<f64>>| -> f64 {
        if let Some(v) = cache[i] {
            return v;
        }
        let v = estimate_bucket(
            scheme,
            state,
            h,
            i,
            k_used,
            &mut derive_stream(coins, "bucket", i as u64),
        );
        cache[i] = Some(v);
        v
    };

    let mut estimates = Vec::with_capacity(buckets);
    let mut accused_bucket = None;
    for i in 0..buckets {
        let v = if !state.bucket_is_empty(i) {
            raw(i, &mut cache)
        } else {
            degraded = true;
            let below = (0..i).rev().find(|&b| !state.bucket_is_empty(b));
            let above = (i + 1..buckets).find(|&b| !state.bucket_is_empty(b));
            match below.or(above) {
                Some(b) => raw(b, &mut cache),
                None => 0.0,
            }
        };
        estimates.push(v);
        if i >= 1 && estimates[i - 1] - v >= threshold {
            accused_bucket = Some(i);
            if settings.lazy {
                break;
            }
        }
    }
    if !settings.lazy {
        accused_bucket = first_gap(&estimates, threshold);
    }
    Ok(TraceVerdict {
        accused: accused_bucket.map(|i| state.draw_of[i - 1]),
        accused_bucket,
        estimates,
        k,
        k_used,
        k_reduced: k_used < k,
        degraded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    Completeness,
    Soundness,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReidentSettings {
    pub lambda: u32,
    pub n: usize,
    pub ell: u8,
    pub alpha: f64,
    pub trace: TraceSettings,
    pub trials: usize,
    pub seed: u64,
    /// Fresh draws used to estimate each hypothesis's error.
    pub error_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub trial: u64,
    pub well_spaced: bool,
    pub error: f64,
    pub accused: Option<usize>,
    pub good_and_untraced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub mode: TraceMode,
    pub learner: String,
    pub scheme: String,
    pub settings: ReidentSettings,
    pub dropped: Option<usize>,
    pub k: u64,
    pub k_used: u64,
    pub k_reduced: bool,
    pub well_spaced: usize,
    pub good: Proportion,
    pub good_and_untraced: Proportion,
    pub good_and_untraced_given_well_spaced: Proportion,
    pub accused_any: Proportion,
    pub accused_any_given_well_spaced: Proportion,
    /// Rate at which the dropped index is accused (soundness runs).
    pub accused_dropped: Option<Proportion>,
    pub accused_dropped_given_well_spaced: Option<Proportion>,
    pub degraded: usize,
    pub rows: Vec<TraceRow>,
}

fn run_trials<S, L>(
    scheme: &S,
    learner: &L,
    settings: &ReidentSettings,
    mode: TraceMode,
    dropped: Option<usize>,
) -> Result<TraceReport>
where
    S: OreScheme,
    L: Learner<S>,
{
    if settings.trials == 0 || settings.error_samples == 0 {
        return Err(Error::usage("trials and error samples must be positive"));
    }
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(Error::usage(format!(
            "α must lie in (0, 1), got {}",
            settings.alpha
        )));
    }
    if let Some(j) = dropped {
        if j == 0 || j > settings.n {
            return Err(Error::usage(format!(
                "drop index {j} outside [1, {}]",
                settings.n
            )));
        }
    }
    let k = k_for(settings.n, settings.trace.gamma, settings.trace.xi)?;
    let results = (0..settings.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_trial_rng(settings.seed, trial);
            let state = gen_ex(scheme, settings.lambda, settings.n, settings.ell, &mut rng)?;
            let coins = fresh_seed(&mut rng);
            let sample = match dropped {
                Some(j) => state.sample_without(j)?,
                None => state.sample.clone(),
            };
            let h = learner.learn(scheme, &sample, &mut rng);
            let dist = UniformMessages::new(state.concept.keys().clone());
            let error = generalization_error(
                scheme,
                &h,
                &state.concept,
                &dist,
                settings.error_samples,
                &mut rng,
            )?
            .rate;
            let verdict = trace_ex(scheme, &state, &h, &settings.trace, &coins)?;
            let row = TraceRow {
                trial,
                well_spaced: state.well_spaced,
                error,
                accused: verdict.accused,
                good_and_untraced: error <= settings.alpha && verdict.accused.is_none(),
            };
            Ok((row, verdict.degraded))
        })
        .collect::<Result<Vec<_>>>()?;
    let degraded = results.iter().filter(|(_, d)| *d).count();
    let rows: Vec<TraceRow> = results.into_iter().map(|(r, _)| r).collect();
    let count = |f: &dyn Fn(&TraceRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let total = rows.len();
    let spaced = count(&|r| r.well_spaced);
    let accused_dropped = dropped.map(|j| Proportion::new(count(&|r| r.accused == Some(j)), total));
    let accused_dropped_given =
        dropped.map(|j| Proportion::new(count(&|r| r.well_spaced && r.accused == Some(j)), spaced));
    Ok(TraceReport {
        mode,
        learner: learner.name(),
        scheme: scheme.name(),
        settings: *settings,
        dropped,
        k,
        k_used: settings.trace.k_mode.samples(k),
        k_reduced: settings.trace.k_mode.samples(k) < k,
        well_spaced: spaced,
        good: Proportion::new(count(&|r| r.error <= settings.alpha), total),
        good_and_untraced: Proportion::new(count(&|r| r.good_and_untraced), total),
        good_and_untraced_given_well_spaced: Proportion::new(
            count(&|r| r.well_spaced && r.good_and_untraced),
            spaced,
        ),
        accused_any: Proportion::new(count(&|r| r.accused.is_some()), total),
        accused_any_given_well_spaced: Proportion::new(
            count(&|r| r.well_spaced && r.accused.is_some()),
            spaced,
        ),
        accused_dropped,
        accused_dropped_given_well_spaced: accused_dropped_given,
        degraded,
        rows,
    })
}

/// Learner trained on the full sample; reports how often a good hypothesis
/// goes untraced.
pub fn completeness_experiment<S: OreScheme, L: Learner<S>>(
    scheme: &S,
    learner: &L,
    settings: &ReidentSettings,
) -> Result<TraceReport> {
    run_trials(scheme, learner, settings, TraceMode::Completeness, None)
}

/// Learner trained on `S_{−dropped}`; reports how often `dropped` is accused.
pub fn soundness_experiment<S: OreScheme, L: Learner<S>>(
    scheme: &S,
    learner: &L,
    settings: &ReidentSettings,
    dropped: usize,
) -> Result<TraceReport> {
    run_trials(
        scheme,
        learner,
        settings,
        TraceMode::Soundness,
        Some(dropped),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpBound {
    pub delta: f64,
    /// False when the bound is not positive: no contradiction at these
    /// parameters.
    pub contradiction: bool,
}

/// `((1 − β − ξ)/n) − e^ε·ξ`: a private learner with `δ` below this value
/// contradicts soundness.
pub fn dp_bound(beta: f64, xi: f64, n: usize, epsilon: f64) -> Result<DpBound> {
    if !((0.0..1.0).contains(&beta)
        && (0.0..1.0).contains(&xi)
        && n > 0
        && epsilon >= 0.0
        && epsilon.is_finite())
    {
        return Err(Error::usage(format!(
            "need β, ξ ∈ [0, 1), n ≥ 1, ε ≥ 0; got β={beta}, ξ={xi}, n={n}, ε={epsilon}"
        )));
    }
    let delta = (1.0 - beta - xi) / n as f64 - epsilon.exp() * xi;
    Ok(DpBound {
        delta,
        contradiction: delta > 0.0,
    })
}
