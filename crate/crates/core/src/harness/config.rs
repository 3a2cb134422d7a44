//! Experiment configuration: strict JSON schema, defaults, range checks and a
//! canonical hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::enc_thresh::DistributionKind;
use crate::error::{Error, Result};
use crate::opf::MAX_OPF_ELL;
use crate::sq::Keyspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Correctness,
    Pac,
    Trace,
    Games,
    Hybrid,
    Sq,
    Validsig,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Correctness => "correctness",
            ExperimentKind::Pac => "pac",
            ExperimentKind::Trace => "trace",
            ExperimentKind::Games => "games",
            ExperimentKind::Hybrid => "hybrid",
            ExperimentKind::Sq => "sq",
            ExperimentKind::Validsig => "validsig",
        }
    }

    /// Accepted modes; the first is the default.
    pub fn modes(self) -> &'static [Mode] {
        use Mode::*;
        match self {
            ExperimentKind::Correctness => &[Strong, Weak, Decryption],
            ExperimentKind::Pac => &[Learn],
            ExperimentKind::Trace => &[Completeness, Soundness],
            ExperimentKind::Games => &[Random, Identical, Payload, Leaked, Synthetic, Learner],
            ExperimentKind::Hybrid => &[Exhaustive, Sampled],
            ExperimentKind::Sq => &[Exact, Jitter],
            ExperimentKind::Validsig => &[Learn, Trace, Forge],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strong,
    Weak,
    Decryption,
    Completeness,
    Soundness,
    /// Static game, random valid challenges, coin-flip guesses.
    Random,
    /// Static game, identical sides.
    Identical,
    /// Single-challenge game, guess from the masked payload.
    Payload,
    /// Single-challenge game, decrypt with the escrowed key.
    Leaked,
    /// Learner-based adversary fed synthetic `(p, q)` hypotheses.
    Synthetic,
    /// Learner-based adversary around the comparator learner.
    Learner,
    Exhaustive,
    Sampled,
    Exact,
    Jitter,
    Learn,
    Trace,
    Forge,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::Weak => "weak",
            Mode::Decryption => "decryption",
            Mode::Completeness => "completeness",
            Mode::Soundness => "soundness",
            Mode::Random => "random",
            Mode::Identical => "identical",
            Mode::Payload => "payload",
            Mode::Leaked => "leaked",
            Mode::Synthetic => "synthetic",
            Mode::Learner => "learner",
            Mode::Exhaustive => "exhaustive",
            Mode::Sampled => "sampled",
            Mode::Exact => "exact",
            Mode::Jitter => "jitter",
            Mode::Learn => "learn",
            Mode::Trace => "trace",
            Mode::Forge => "forge",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifierChoice {
    Escrow,
    Signature,
}

/// `"opf"` or `{"strengthened": "escrow" | "signature"}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    Opf,
    Strengthened(CertifierChoice),
}

impl Default for SchemeChoice {
    fn default() -> Self {
        SchemeChoice::Strengthened(CertifierChoice::Escrow)
    }
}

fn d_lambda() -> u32 {
    128
}
fn d_ell() -> u16 {
    16
}
fn d_alpha() -> f64 {
    0.05
}
fn d_beta() -> f64 {
    0.05
}
fn d_gamma() -> f64 {
    0.45
}
fn d_xi() -> f64 {
    0.01
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_trials() -> usize {
    100
}
fn d_error_samples() -> usize {
    4000
}
fn d_q() -> usize {
    3
}
fn d_keyspace() -> Keyspace {
    Keyspace::Oracle
}
fn d_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "d_lambda")]
    pub lambda: u32,
    #[serde(default = "d_ell")]
    pub ell: u16,
    /// Sample size; 0 derives it from α and β where that applies.
    #[serde(default)]
    pub n: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_xi")]
    pub xi: f64,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scheme: SchemeChoice,
    /// PAC runs cover every family when unset.
    #[serde(default)]
    pub distribution: Option<DistributionKind>,
    /// Index left out of the learner's sample (soundness runs, game `j*`).
    #[serde(default)]
    pub dropped: Option<usize>,
    /// Per-bucket sample cap for tracing; unset runs the full `K`.
    #[serde(default)]
    pub k_cap: Option<u64>,
    /// Stop tracing at the first accusation.
    #[serde(default = "d_true")]
    pub lazy: bool,
    #[serde(default = "d_error_samples")]
    pub error_samples: usize,
    #[serde(default = "d_keyspace")]
    pub keyspace: Keyspace,
    /// Challenge length for games and hybrids.
    #[serde(default = "d_q")]
    pub q: usize,
    /// Hybrid exhaustive mode: messages range over `0..domain`.
    #[serde(default)]
    pub domain: Option<u64>,
    /// Synthetic hypothesis rates below and above the split point.
    #[serde(default)]
    pub synthetic_p: Option<f64>,
    #[serde(default)]
    pub synthetic_q: Option<f64>,
    /// Keep params and ciphertexts in game transcripts.
    #[serde(default)]
    pub transcripts: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": experiment }))
            .expect("defaults parse")
    }

    /// Parses JSON, naming the offending field on failure, then range-checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(self.experiment.modes()[0])
    }

    pub fn ore_ell(&self) -> Result<u8> {
        if self.ell == 0 || self.ell > MAX_OPF_ELL as u16 {
            return Err(Error::config(
                "ell",
                format!("must lie in [1, {MAX_OPF_ELL}], got {}", self.ell),
            ));
        }
        Ok(self.ell as u8)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.mode {
            if !self.experiment.modes().contains(&m) {
                let allowed: Vec<_> = self.experiment.modes().iter().map(|m| m.as_str()).collect();
                return Err(Error::config(
                    "mode",
                    format!(
                        "`{}` is not a mode of `{}`; expected one of {}",
                        m.as_str(),
                        self.experiment.as_str(),
                        allowed.join(", ")
                    ),
                ));
            }
        }
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::config(name, format!("must lie in (0, 1), got {v}")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("xi", self.xi)?;
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(Error::config(
                "gamma",
                format!("must lie in (0, 1/2], got {}", self.gamma),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(
                "epsilon",
                format!("must be positive, got {}", self.epsilon),
            ));
        }
        if self.error_samples == 0 {
            return Err(Error::config("error_samples", "must be positive"));
        }
        match self.experiment {
            ExperimentKind::Validsig => {
                if self.ell == 0 || self.ell > 256 {
                    return Err(Error::config(
                        "ell",
                        format!("must lie in [1, 256], got {}", self.ell),
                    ));
                }
            }
            ExperimentKind::Sq => {
                if self.ell == 0 || self.ell > 20 {
                    return Err(Error::config(
                        "ell",
                        format!("must lie in [1, 20], got {}", self.ell),
                    ));
                }
            }
            ExperimentKind::Hybrid if self.mode() == Mode::Exhaustive => {
                let d = self.domain.unwrap_or(10);
                if d as u128 > crate::ore::domain_size(self.ore_ell()?) || d > 64 {
                    return Err(Error::config(
                        "domain",
                        format!("must fit the ℓ-bit domain and be ≤ 64, got {d}"),
                    ));
                }
            }
            _ => {
                self.ore_ell()?;
            }
        }
        if let Some(cap) = self.k_cap {
            if cap == 0 {
                return Err(Error::config("k_cap", "must be positive"));
            }
        }
        for (name, v) in [
            ("synthetic_p", self.synthetic_p),
            ("synthetic_q", self.synthetic_q),
        ] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::config(name, format!("must lie in [0, 1], got {v}")));
                }
            }
        }
        if matches!(
            self.experiment,
            ExperimentKind::Games | ExperimentKind::Hybrid
        ) && self.q == 0
        {
            return Err(Error::config("q", "must be positive"));
        }
        Ok(())
    }

    /// Canonical JSON: every field, defaults filled in, fixed order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
