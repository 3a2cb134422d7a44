//! Dispatch from a config to the experiment it names.

use std::time::Instant;

use serde_json::json;

use super::config::{CertifierChoice, ExperimentConfig, ExperimentKind, Mode, SchemeChoice};
use super::report::*;
use crate::enc_thresh::pac::{pac_experiment, PacSettings};
use crate::enc_thresh::{ComparatorLearner, DistributionKind};
use crate::error::{Error, Result};
use crate::games::adversaries::sorted_distinct;
use crate::games::reduction::escrow_oracle;
use crate::games::{
    adversary_success_prob, hybrid_schedule, run_single_challenge_game, run_static_game,
    ChallengePair, FromLearner, GameReport, GameSettings, IdenticalSides, LeakedKeyDecryptor,
    LearnerAdversary, PayloadProbe, RandomGuesser, SyntheticBuckets,
};
use crate::opf::OpfOre;
use crate::ore::correctness::{
    check_decryption_correctness, check_strong_with_key, check_weak_with_key, FuzzSampler,
};
use crate::ore::{domain_size, KeyMaterial, OreScheme};
use crate::reident::{
    completeness_experiment, soundness_experiment, KMode, ReidentSettings, TraceSettings,
};
use crate::rng::{derive_trial_rng, uniform_below};
use crate::signature::Ed25519;
use crate::sq::{run_sq_experiment, AnswerMode, SqSettings};
use crate::strengthen::{escrow_ore, signature_ore, Certifier, Strengthened};
use crate::validsig::{
    forgery_experiment, learn_experiment, trace_experiment, ForgeryLearner, ValidSigSettings,
};

/// Default sample size for tracing and reduction runs when `n` is 0.
pub const DEFAULT_TRACE_N: usize = 50;

struct Outcome {
    gate: Option<bool>,
    gate_detail: String,
    summary: serde_json::Value,
    tables: Vec<Table>,
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs the configured experiment. Per-trial rows depend only on the config.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let out = if cfg.trials == 0 {
        Outcome {
            gate: None,
            gate_detail: "no trials".into(),
            summary: json!({}),
            tables: vec![Table::new("rows", header_for(cfg))],
        }
    } else {
        match cfg.experiment {
            ExperimentKind::Correctness => with_scheme(cfg, Correctness)?,
            ExperimentKind::Pac => with_scheme(cfg, Pac)?,
            ExperimentKind::Trace => with_scheme(cfg, Trace)?,
            ExperimentKind::Games => games(cfg)?,
            ExperimentKind::Hybrid => hybrid(cfg)?,
            ExperimentKind::Sq => with_scheme(cfg, Sq)?,
            ExperimentKind::Validsig => validsig(cfg)?,
        }
    };
    Ok(ExperimentReport {
        experiment: cfg.experiment.as_str().into(),
        mode: cfg.mode().as_str().into(),
        config_hash: cfg.hash(),
        config: serde_json::to_value(cfg)?,
        library_version: env!("CARGO_PKG_VERSION").into(),
        csv_schema: CSV_SCHEMA_VERSION,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        gate: out.gate,
        gate_detail: out.gate_detail,
        summary: out.summary,
        tables: out.tables,
    })
}

fn header_for(cfg: &ExperimentConfig) -> &'static [&'static str] {
    match (cfg.experiment, cfg.mode()) {
        (ExperimentKind::Correctness, Mode::Weak) => CORRECTNESS_WEAK_HEADER,
        (ExperimentKind::Correctness, Mode::Decryption) => CORRECTNESS_DECRYPTION_HEADER,
        (ExperimentKind::Correctness, _) => CORRECTNESS_STRONG_HEADER,
        (ExperimentKind::Pac, _) => PAC_HEADER,
        (ExperimentKind::Trace, _) => TRACE_HEADER,
        (ExperimentKind::Games, _) => GAMES_HEADER,
        (ExperimentKind::Hybrid, Mode::Sampled) => HYBRID_SAMPLED_HEADER,
        (ExperimentKind::Hybrid, _) => HYBRID_EXHAUSTIVE_HEADER,
        (ExperimentKind::Sq, _) => SQ_HEADER,
        (ExperimentKind::Validsig, Mode::Trace) => VALIDSIG_TRACE_HEADER,
        (ExperimentKind::Validsig, Mode::Forge) => VALIDSIG_FORGE_HEADER,
        (ExperimentKind::Validsig, _) => VALIDSIG_LEARN_HEADER,
    }
}

/// An experiment generic over the ORE scheme.
trait SchemeJob {
    fn run<S: OreScheme + 'static>(&self, scheme: &S, cfg: &ExperimentConfig) -> Result<Outcome>;
}

fn with_scheme(cfg: &ExperimentConfig, job: impl SchemeJob) -> Result<Outcome> {
    match cfg.scheme {
        SchemeChoice::Opf => job.run(&OpfOre, cfg),
        SchemeChoice::Strengthened(CertifierChoice::Escrow) => job.run(&escrow_ore(), cfg),
        SchemeChoice::Strengthened(CertifierChoice::Signature) => job.run(&signature_ore(), cfg),
    }
}

struct Correctness;

impl SchemeJob for Correctness {
    fn run<S: OreScheme + 'static>(&self, scheme: &S, cfg: &ExperimentConfig) -> Result<Outcome> {
        let ell = cfg.ore_ell()?;
        let mut rng = derive_trial_rng(cfg.seed, 0);
        match cfg.mode() {
            Mode::Weak => {
                let km = KeyMaterial::sample(scheme, cfg.lambda, ell, &mut rng)?;
                let pairs: Vec<(u64, u64)> = if ell <= 6 {
                    let n = domain_size(ell) as u64;
                    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
                } else {
                    let n = domain_size(ell);
                    (0..cfg.trials)
                        .map(|_| (uniform_below(&mut rng, n), uniform_below(&mut rng, n)))
                        .collect()
                };
                let report = check_weak_with_key(scheme, &km, &pairs, &mut rng)?;
                let mut t = Table::new("mismatches", CORRECTNESS_WEAK_HEADER);
                for (i, m) in report.mismatches.iter().enumerate() {
                    t.push(vec![s(i), s(m.m0), s(m.m1), s(m.expected), s(m.got)]);
                }
                Ok(Outcome {
                    gate: Some(report.passed()),
                    gate_detail: format!(
                        "{} mismatches in {} pairs",
                        report.mismatches.len(),
                        report.checked
                    ),
                    summary: json!({ "scheme": scheme.name(), "checked": report.checked, "mismatches": report.mismatches.len(), "exhaustive": ell <= 6 }),
                    tables: vec![t],
                })
            }
            Mode::Decryption => {
                let n = domain_size(ell);
                let messages: Vec<u64> = if ell <= 10 {
                    (0..n as u64).collect()
                } else {
                    (0..cfg.trials)
                        .map(|_| uniform_below(&mut rng, n))
                        .collect()
                };
                let report =
                    check_decryption_correctness(scheme, cfg.lambda, ell, &messages, 1, &mut rng)?;
                let mut t = Table::new("failures", CORRECTNESS_DECRYPTION_HEADER);
                for (i, f) in report.failures.iter().enumerate() {
                    t.push(vec![s(i), s(f.message), opt(f.decrypted)]);
                }
                Ok(Outcome {
                    gate: Some(report.passed()),
                    gate_detail: format!(
                        "{} failures in {} round trips",
                        report.failures.len(),
                        report.checked
                    ),
                    summary: json!({ "scheme": scheme.name(), "checked": report.checked, "failures": report.failures.len() }),
                    tables: vec![t],
                })
            }
            _ => {
                let km = KeyMaterial::sample(scheme, cfg.lambda, ell, &mut rng)?;
                let report = check_strong_with_key(
                    scheme,
                    &km,
                    &FuzzSampler::default(),
                    cfg.trials,
                    &mut rng,
                );
                let mut t = Table::new("rows", CORRECTNESS_STRONG_HEADER);
                for r in &report.rows {
                    t.push(vec![
                        s(r.index),
                        s(r.class0.as_str()),
                        s(r.class1.as_str()),
                        s(r.comp),
                        s(r.comp_ciph),
                        s(r.agrees()),
                    ]);
                }
                Ok(Outcome {
                    gate: Some(report.passed()),
                    gate_detail: format!(
                        "{} mismatches in {} pairs",
                        report.mismatches, report.pairs
                    ),
                    summary: json!({
                        "scheme": scheme.name(),
                        "pairs": report.pairs,
                        "mismatches": report.mismatches,
                        "by_class": report.by_class,
                        "witnesses": report.witnesses,
                    }),
                    tables: vec![t],
                })
            }
        }
    }
}

struct Pac;

impl SchemeJob for Pac {
    fn run<S: OreScheme + 'static>(&self, scheme: &S, cfg: &ExperimentConfig) -> Result<Outcome> {
        let kinds: Vec<DistributionKind> = match cfg.distribution {
            Some(k) => vec![k],
            None => DistributionKind::ALL.to_vec(),
        };
        let mut t = Table::new("rows", PAC_HEADER);
        let mut reports = Vec::new();
        let floor = 1.0 - cfg.beta - 0.05;
        let mut ok = true;
        for (i, kind) in kinds.into_iter().enumerate() {
            let settings = PacSettings {
                lambda: cfg.lambda,
                ell: cfg.ore_ell()?,
                n: cfg.n,
                alpha: cfg.alpha,
                beta: cfg.beta,
                trials: cfg.trials,
                seed: cfg.seed.wrapping_add((i as u64) << 48),
                error_samples: cfg.error_samples,
            };
            let mut r = pac_experiment(scheme, &ComparatorLearner, kind, &settings)?;
            ok &= r.good.rate >= floor && r.one_sided_failures == 0;
            for row in &r.rows {
                t.push(vec![
                    s(kind.as_str()),
                    s(row.trial),
                    s(row.threshold),
                    s(row.positives),
                    s(row.error),
                    s(row.exact),
                    s(row.one_sided_violations),
                    s(row.good),
                ]);
            }
            r.rows.clear();
            reports.push(r);
        }
        Ok(Outcome {
            gate: Some(ok),
            gate_detail: format!(
                "every family needs Pr[error ≤ α] ≥ {floor:.2} and no one-sided violations"
            ),
            summary: json!({ "scheme": scheme.name(), "families": reports }),
            tables: vec![t],
        })
    }
}

struct Trace;

impl SchemeJob for Trace {
    fn run<S: OreScheme + 'static>(&self, scheme: &S, cfg: &ExperimentConfig) -> Result<Outcome> {
        let k_mode = match cfg.k_cap {
            Some(cap) => KMode::Reduced { cap },
            None => KMode::Full,
        };
        let mut trace = TraceSettings::new(cfg.gamma, cfg.xi, k_mode)?;
        trace.lazy = cfg.lazy;
        let settings = ReidentSettings {
            lambda: cfg.lambda,
            n: if cfg.n == 0 { DEFAULT_TRACE_N } else { cfg.n },
            ell: cfg.ore_ell()?,
            // Goodness threshold for tracing is error ≤ 1/2 − γ.
            alpha: 0.5 - cfg.gamma,
            trace,
            trials: cfg.trials,
            seed: cfg.seed,
            error_samples: cfg.error_samples,
        };
        let mut report = match cfg.mode() {
            Mode::Soundness => soundness_experiment(
                scheme,
                &ComparatorLearner,
                &settings,
                cfg.dropped.unwrap_or(1),
            )?,
            _ => completeness_experiment(scheme, &ComparatorLearner, &settings)?,
        };
        let mut t = Table::new("rows", TRACE_HEADER);
        for r in &report.rows {
            t.push(vec![
                s(r.trial),
                s(r.well_spaced),
                s(r.error),
                opt(r.accused),
                s(r.good_and_untraced),
            ]);
        }
        let (gate, detail) = match report.accused_dropped {
            Some(p) => (p.rate <= 0.02, format!("accused dropped index at rate {:.4} (limit 0.02)", p.rate)),
            None => (
                report.good_and_untraced.rate <= 0.05 && report.accused_any_given_well_spaced.rate >= 0.95,
                format!(
                    "good and untraced {:.4} (limit 0.05); accused given well spaced {:.4} (floor 0.95)",
                    report.good_and_untraced.rate, report.accused_any_given_well_spaced.rate
                ),
            ),
        };
        report.rows.clear();
        Ok(Outcome {
            gate: Some(gate),
            gate_detail: detail,
            summary: serde_json::to_value(&report)?,
            tables: vec![t],
        })
    }
}

struct Sq;

impl SchemeJob for Sq {
    fn run<S: OreScheme + 'static>(&self, scheme: &S, cfg: &ExperimentConfig) -> Result<Outcome> {
        let settings = SqSettings {
            lambda: cfg.lambda,
            ell: cfg.ell as u8,
            alpha: cfg.alpha,
            mode: if cfg.mode() == Mode::Jitter {
                AnswerMode::Jitter
            } else {
                AnswerMode::Exact
            },
            keyspace: cfg.keyspace,
            trials: cfg.trials,
            seed: cfg.seed,
        };
        let mut report = run_sq_experiment(scheme, &settings)?;
        let mut t = Table::new("rows", SQ_HEADER);
        for r in &report.rows {
            t.push(vec![
                s(r.trial),
                s(r.threshold),
                opt(r.recovered),
                s(r.queries),
                s(r.query_bound),
                s(r.error),
                s(r.params_recovered),
            ]);
        }
        report.rows.clear();
        Ok(Outcome {
            gate: Some(report.all_good),
            gate_detail: format!(
                "max error {} (limit {}), max queries {} (bound {})",
                report.max_error, cfg.alpha, report.max_queries, report.query_bound
            ),
            summary: json!({ "scheme": scheme.name(), "report": report }),
            tables: vec![t],
        })
    }
}

fn game_outcome(
    cfg: &ExperimentConfig,
    report: GameReport,
    gate: bool,
    detail: String,
    extra: serde_json::Value,
) -> Outcome {
    let mut summary = Table::new("summary", GAMES_HEADER);
    summary.push(vec![
        report.game.clone(),
        s(report.trials),
        s(report.advantage.advantage),
        s(report.advantage.ci_lo),
        s(report.advantage.ci_hi),
    ]);
    let mut tables = vec![summary];
    if cfg.transcripts {
        let mut t = Table::new("transcripts", TRANSCRIPT_HEADER);
        for tr in &report.transcripts {
            t.push(vec![
                s(tr.trial),
                s(tr.b),
                s(tr.guess),
                s(tr.win),
                s(tr.flagged),
            ]);
        }
        tables.push(t);
    }
    let mut value = serde_json::to_value(&report).expect("report serializes");
    if !cfg.transcripts {
        value["transcripts"] = json!([]);
    }
    value["expected"] = extra;
    Outcome {
        gate: Some(gate),
        gate_detail: detail,
        summary: value,
        tables,
    }
}

fn zero_advantage(report: GameReport, cfg: &ExperimentConfig) -> Outcome {
    let a = report.advantage;
    let gate = a.covers(0.0);
    let detail = format!(
        "advantage {:.4}, interval [{:.4}, {:.4}] should contain 0",
        a.advantage, a.ci_lo, a.ci_hi
    );
    game_outcome(cfg, report, gate, detail, json!(0.0))
}

fn games(cfg: &ExperimentConfig) -> Result<Outcome> {
    let settings = GameSettings {
        lambda: cfg.lambda,
        ell: cfg.ore_ell()?,
        trials: cfg.trials,
        seed: cfg.seed,
        full_transcripts: cfg.transcripts,
    };
    let n = if cfg.n == 0 { DEFAULT_TRACE_N } else { cfg.n };
    let j_star = cfg.dropped.unwrap_or(1);
    let q = cfg.q;
    let need_escrow = || Error::config("scheme", "this game needs {\"strengthened\": \"escrow\"}");
    let need_strong = || Error::config("scheme", "this game needs a strengthened scheme");
    match cfg.mode() {
        Mode::Random => {
            let r = match cfg.scheme {
                SchemeChoice::Opf => run_static_game(&OpfOre, &RandomGuesser { q }, &settings)?,
                SchemeChoice::Strengthened(CertifierChoice::Escrow) => {
                    run_static_game(&escrow_ore(), &RandomGuesser { q }, &settings)?
                }
                SchemeChoice::Strengthened(CertifierChoice::Signature) => {
                    run_static_game(&signature_ore(), &RandomGuesser { q }, &settings)?
                }
            };
            Ok(zero_advantage(r, cfg))
        }
        Mode::Identical => {
            let r = match cfg.scheme {
                SchemeChoice::Opf => run_static_game(&OpfOre, &IdenticalSides { q }, &settings)?,
                SchemeChoice::Strengthened(CertifierChoice::Escrow) => {
                    run_static_game(&escrow_ore(), &IdenticalSides { q }, &settings)?
                }
                SchemeChoice::Strengthened(CertifierChoice::Signature) => {
                    run_static_game(&signature_ore(), &IdenticalSides { q }, &settings)?
                }
            };
            Ok(zero_advantage(r, cfg))
        }
        Mode::Payload => {
            let r = match cfg.scheme {
                SchemeChoice::Opf => return Err(need_strong()),
                SchemeChoice::Strengthened(CertifierChoice::Escrow) => {
                    payload_game(&escrow_ore(), q, &settings)?
                }
                SchemeChoice::Strengthened(CertifierChoice::Signature) => {
                    payload_game(&signature_ore(), q, &settings)?
                }
            };
            Ok(zero_advantage(r, cfg))
        }
        Mode::Leaked => {
            if cfg.scheme != SchemeChoice::Strengthened(CertifierChoice::Escrow) {
                return Err(need_escrow());
            }
            let r = run_single_challenge_game(&escrow_ore(), &LeakedKeyDecryptor { q }, &settings)?;
            let a = r.advantage.advantage;
            Ok(game_outcome(
                cfg,
                r,
                a >= 0.9,
                format!("advantage {a:.4} (floor 0.9)"),
                json!(1.0),
            ))
        }
        Mode::Synthetic => {
            if cfg.scheme != SchemeChoice::Strengthened(CertifierChoice::Escrow) {
                return Err(need_escrow());
            }
            let (p, qq) = (
                cfg.synthetic_p.unwrap_or(1.0),
                cfg.synthetic_q.unwrap_or(0.0),
            );
            let expected = adversary_success_prob(p, qq)?;
            let source = SyntheticBuckets::new(p, qq, escrow_oracle(OpfOre))?;
            let adv = LearnerAdversary::new(n, j_star, source)?;
            let r = run_static_game(&escrow_ore(), &adv, &settings)?;
            let got = r.unflagged.win_rate;
            let tol = 0.01f64.max(3.0 * (0.25 / r.unflagged.trials.max(1) as f64).sqrt());
            let detail =
                format!("success rate {got:.5} vs formula {expected:.5} (tolerance {tol:.4})");
            Ok(game_outcome(
                cfg,
                r,
                (got - expected).abs() <= tol,
                detail,
                json!(expected),
            ))
        }
        Mode::Learner => {
            let adv = LearnerAdversary::new(n, j_star, FromLearner(ComparatorLearner))?;
            let r = match cfg.scheme {
                SchemeChoice::Opf => run_static_game(&OpfOre, &adv, &settings)?,
                SchemeChoice::Strengthened(CertifierChoice::Escrow) => {
                    run_static_game(&escrow_ore(), &adv, &settings)?
                }
                SchemeChoice::Strengthened(CertifierChoice::Signature) => {
                    run_static_game(&signature_ore(), &adv, &settings)?
                }
            };
            Ok(zero_advantage(r, cfg))
        }
        m => Err(Error::config(
            "mode",
            format!("`{}` is not a games mode", m.as_str()),
        )),
    }
}

fn payload_game<C: Certifier<OpfOre> + 'static>(
    scheme: &Strengthened<OpfOre, C>,
    q: usize,
    settings: &GameSettings,
) -> Result<GameReport> {
    run_single_challenge_game(scheme, &PayloadProbe { q }, settings)
}

/// Endpoints, ascending order and single-position steps.
pub fn schedule_flaws(pair: &ChallengePair, hybrids: &[Vec<u64>]) -> (bool, bool, bool) {
    let endpoints = hybrids.first() == Some(&pair.left) && hybrids.last() == Some(&pair.right);
    let ascending = hybrids.iter().all(|h| h.windows(2).all(|w| w[0] < w[1]));
    let adjacent = hybrids
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).filter(|(a, b)| a != b).count() <= 1);
    (!endpoints, !ascending, !adjacent)
}

fn combinations(domain: u64, q: usize) -> Vec<Vec<u64>> {
    fn go(start: u64, domain: u64, left: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..domain {
            cur.push(v);
            go(v + 1, domain, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, domain, q, &mut Vec::new(), &mut out);
    out
}

fn hybrid(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ell = cfg.ore_ell()?;
    if cfg.mode() == Mode::Sampled {
        if cfg.q as u128 > domain_size(ell) {
            return Err(Error::config("q", "longer than the ℓ-bit domain"));
        }
        let mut t = Table::new("rows", HYBRID_SAMPLED_HEADER);
        let mut bad = 0;
        for trial in 0..cfg.trials {
            let mut rng = derive_trial_rng(cfg.seed, trial as u64);
            let pair = ChallengePair::new(
                sorted_distinct(&mut rng, cfg.q, ell),
                sorted_distinct(&mut rng, cfg.q, ell),
            );
            let h = hybrid_schedule(&pair, ell)?;
            let (e, a, j) = schedule_flaws(&pair, &h);
            let ok = !(e || a || j);
            bad += usize::from(!ok);
            let join = |v: &[u64]| {
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            t.push(vec![
                s(trial),
                s(cfg.q),
                join(&pair.left),
                join(&pair.right),
                s(h.len()),
                s(ok),
            ]);
        }
        return Ok(Outcome {
            gate: Some(bad == 0),
            gate_detail: format!("{bad} flawed schedules"),
            summary: json!({ "q": cfg.q, "ell": ell, "flawed": bad }),
            tables: vec![t],
        });
    }
    let domain = cfg.domain.unwrap_or(10);
    let mut t = Table::new("rows", HYBRID_EXHAUSTIVE_HEADER);
    let mut total_bad = 0;
    for q in 1..=cfg.q {
        let seqs = combinations(domain, q);
        let (mut pairs, mut hybrids, mut fe, mut fa, mut fj) =
            (0usize, 0usize, 0usize, 0usize, 0usize);
        for l in &seqs {
            for r in &seqs {
                let pair = ChallengePair::new(l.clone(), r.clone());
                let h = hybrid_schedule(&pair, ell)?;
                let (e, a, j) = schedule_flaws(&pair, &h);
                pairs += 1;
                hybrids += h.len();
                fe += usize::from(e);
                fa += usize::from(a);
                fj += usize::from(j);
            }
        }
        total_bad += fe + fa + fj;
        t.push(vec![s(q), s(pairs), s(hybrids), s(fe), s(fa), s(fj)]);
    }
    Ok(Outcome {
        gate: Some(total_bad == 0),
        gate_detail: format!(
            "{total_bad} flaws over all pairs with q ≤ {} on 0..{domain}",
            cfg.q
        ),
        summary: json!({ "domain": domain, "max_q": cfg.q, "flaws": total_bad }),
        tables: vec![t],
    })
}

fn validsig(cfg: &ExperimentConfig) -> Result<Outcome> {
    let settings = ValidSigSettings {
        lambda: cfg.lambda,
        n: cfg.n,
        ell: cfg.ell,
        alpha: cfg.alpha,
        beta: cfg.beta,
        trials: cfg.trials,
        seed: cfg.seed,
        error_samples: cfg.error_samples,
    };
    match cfg.mode() {
        Mode::Trace => {
            let dropped = cfg.dropped.unwrap_or(0);
            let mut r = trace_experiment(&Ed25519, &settings, dropped)?;
            let mut t = Table::new("rows", VALIDSIG_TRACE_HEADER);
            for row in &r.rows {
                t.push(vec![
                    s(row.trial),
                    s(row.dropped),
                    s(row.bottom),
                    opt(row.accused),
                ]);
            }
            let (gate, detail) = if dropped == 0 {
                (
                    r.traced == r.non_bottom,
                    format!("{} of {} non-⊥ outputs traced", r.traced, r.non_bottom),
                )
            } else {
                (
                    r.accused_dropped.successes == 0,
                    format!(
                        "dropped index accused {} times",
                        r.accused_dropped.successes
                    ),
                )
            };
            r.rows.clear();
            Ok(Outcome {
                gate: Some(gate),
                gate_detail: detail,
                summary: serde_json::to_value(&r)?,
                tables: vec![t],
            })
        }
        Mode::Forge => {
            let mut t = Table::new("rows", VALIDSIG_FORGE_HEADER);
            let mut reports = Vec::new();
            for which in ForgeryLearner::ALL {
                let r = forgery_experiment(&Ed25519, &settings, which)?;
                t.push(vec![
                    r.learner.clone(),
                    s(r.trials),
                    s(r.attempts),
                    s(r.wins),
                    s(r.value),
                ]);
                reports.push((which, r));
            }
            let gate = reports.iter().all(|(w, r)| match w {
                ForgeryLearner::LeakedKey => r.wins == r.trials,
                _ => r.wins == 0,
            });
            Ok(Outcome {
                gate: Some(gate),
                gate_detail:
                    "honest and ⊥ learners never forge; the leaked-key control always does".into(),
                summary: serde_json::to_value(reports.iter().map(|(_, r)| r).collect::<Vec<_>>())?,
                tables: vec![t],
            })
        }
        _ => {
            let mut r = learn_experiment(&Ed25519, &settings)?;
            let mut t = Table::new("rows", VALIDSIG_LEARN_HEADER);
            for row in &r.rows {
                t.push(vec![
                    s(row.distribution.as_str()),
                    s(row.trial),
                    s(row.bottom),
                    s(row.error),
                    s(row.good),
                ]);
            }
            let floor = 1.0 - cfg.beta - 0.05;
            let gate = r.per_distribution.iter().all(|(_, p)| p.rate >= floor);
            r.rows.clear();
            Ok(Outcome {
                gate: Some(gate),
                gate_detail: format!("success rate ≥ {floor:.2} under every distribution"),
                summary: serde_json::to_value(&r)?,
                tables: vec![t],
            })
        }
    }
}
