//! Repeated learn-and-measure runs over one distribution family.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    draw_sample, generalization_error, required_sample_size, DistributionKind, EncThreshConcept,
    Learner,
};
use crate::error::{Error, Result};
use crate::ore::{domain_size, KeyMaterial, OreScheme};
use crate::rng::{derive_trial_rng, uniform_below};
use crate::stats::Proportion;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacSettings {
    pub lambda: u32,
    pub ell: u8,
    /// Sample size; 0 means `⌈ln(1/β)/α⌉`.
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    pub error_samples: usize,
}

impl PacSettings {
    pub fn sample_size(&self) -> Result<usize> {
        if self.n > 0 {
            Ok(self.n)
        } else {
            required_sample_size(self.alpha, self.beta)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacRow {
    pub trial: u64,
    pub threshold: u128,
    pub positives: usize,
    pub error: f64,
    pub exact: bool,
    pub one_sided_violations: usize,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacReport {
    pub distribution: DistributionKind,
    pub learner: String,
    pub n: usize,
    pub good: Proportion,
    /// Trials where the hypothesis said 1 on some point the concept labels 0.
    pub one_sided_failures: usize,
    pub rows: Vec<PacRow>,
}

/// Per trial: fresh keys, a threshold uniform in `[0, N]`, `n` labeled draws,
/// one learner run, and the error of its output (exact on finite supports).
pub fn pac_experiment<S, L>(
    scheme: &S,
    learner: &L,
    kind: DistributionKind,
    settings: &PacSettings,
) -> Result<PacReport>
where
    S: OreScheme + 'static,
    L: Learner<S>,
{
    let n = settings.sample_size()?;
    if settings.error_samples == 0 {
        return Err(Error::usage("error estimate needs at least one sample"));
    }
    let rows = (0..settings.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<PacRow> {
            let mut rng = derive_trial_rng(settings.seed, trial);
            let keys = Arc::new(KeyMaterial::sample(
                scheme,
                settings.lambda,
                settings.ell,
                &mut rng,
            )?);
            let t = uniform_below(&mut rng, domain_size(settings.ell) + 1) as u128;
            let concept = EncThreshConcept::new(t, keys.clone())?;
            let dist = kind.build(scheme, &keys, &mut rng)?;
            let sample = draw_sample(scheme, &concept, dist.as_ref(), n, &mut rng);
            let h = learner.learn(scheme, &sample, &mut rng);
            let est = generalization_error(
                scheme,
                &h,
                &concept,
                dist.as_ref(),
                settings.error_samples,
                &mut rng,
            )?;
            Ok(PacRow {
                trial,
                threshold: t,
                positives: sample.iter().filter(|s| s.label).count(),
                error: est.rate,
                exact: est.exact,
                one_sided_violations: est.one_sided_violations,
                good: est.rate <= settings.alpha,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let good = rows.iter().filter(|r| r.good).count();
    Ok(PacReport {
        distribution: kind,
        learner: learner.name(),
        n,
        good: Proportion::new(good, rows.len()),
        one_sided_failures: rows.iter().filter(|r| r.one_sided_violations > 0).count(),
        rows,
    })
}
