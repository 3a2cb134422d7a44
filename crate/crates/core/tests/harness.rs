use ore_learn::harness::{self, ExperimentConfig, ExperimentKind, OutputFormat};
use ore_learn::rng::{derive_stream, derive_trial_rng, stream_seed, trial_seed};
use ore_learn::Error;
use rand::RngCore;

fn cfg(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn csv_bodies(r: &harness::ExperimentReport) -> Vec<String> {
    r.tables.iter().map(|t| t.to_csv().unwrap()).collect()
}

#[test]
fn same_config_gives_identical_tables() {
    for text in [
        r#"{"experiment":"correctness","mode":"strong","ell":12,"trials":300,"seed":4}"#,
        r#"{"experiment":"pac","ell":16,"trials":10,"seed":5,"error_samples":200}"#,
        r#"{"experiment":"games","mode":"random","trials":500,"seed":6}"#,
        r#"{"experiment":"sq","ell":10,"trials":4,"seed":7,"mode":"jitter"}"#,
        r#"{"experiment":"validsig","mode":"forge","ell":64,"trials":20,"seed":8}"#,
        r#"{"experiment":"trace","n":10,"ell":32,"trials":4,"seed":9,"k_cap":200,"error_samples":100}"#,
    ] {
        let c = cfg(text);
        let a = harness::run(&c).unwrap();
        let b = harness::run(&c).unwrap();
        assert_eq!(csv_bodies(&a), csv_bodies(&b), "{text}");
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.config_hash, b.config_hash);
    }
}

#[test]
fn different_seeds_give_different_rows() {
    let a = harness::run(&cfg(
        r#"{"experiment":"games","mode":"random","trials":200,"seed":1}"#,
    ))
    .unwrap();
    let b = harness::run(&cfg(
        r#"{"experiment":"games","mode":"random","trials":200,"seed":2}"#,
    ))
    .unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_ne!(a.summary, b.summary);
}

#[test]
fn zero_trials_give_an_empty_report() {
    let r = harness::run(&cfg(r#"{"experiment":"trace","trials":0}"#)).unwrap();
    assert_eq!(r.gate, None);
    assert_eq!(r.tables.len(), 1);
    assert!(r.tables[0].rows.is_empty());
    assert_eq!(r.tables[0].to_csv().unwrap().lines().count(), 1);
}

#[test]
fn schema_errors_name_the_field() {
    let e = ExperimentConfig::from_json(r#"{"experiment":"sq","mode":"loud"}"#).unwrap_err();
    assert!(
        matches!(&e, Error::Config { path, .. } if path == "mode"),
        "{e}"
    );
    let e = ExperimentConfig::from_json(r#"{"experiment":"sq","mode":"strong"}"#).unwrap_err();
    assert!(
        matches!(&e, Error::Config { path, .. } if path == "mode"),
        "{e}"
    );
    let e = ExperimentConfig::from_json(r#"{"experiment":"games","alpha":"high"}"#).unwrap_err();
    assert!(
        matches!(&e, Error::Config { path, .. } if path == "alpha"),
        "{e}"
    );
    let e = ExperimentConfig::from_json(r#"{"experiment":"games","colour":1}"#).unwrap_err();
    assert!(matches!(e, Error::Config { .. }));
    let e = ExperimentConfig::from_json(r#"{"experiment":"games","gamma":0.7}"#).unwrap_err();
    assert!(matches!(&e, Error::Config { path, .. } if path == "gamma"));
    let e = ExperimentConfig::from_json(r#"{"experiment":"correctness","ell":60}"#).unwrap_err();
    assert!(matches!(&e, Error::Config { path, .. } if path == "ell"));
    let e = ExperimentConfig::from_json(r#"{"experiment":"nope"}"#).unwrap_err();
    assert!(matches!(&e, Error::Config { path, .. } if path == "experiment"));
}

#[test]
fn defaults_and_canonical_hash() {
    let a = ExperimentConfig::new(ExperimentKind::Games);
    let b = cfg(r#"{"experiment":"games","lambda":128,"ell":16,"seed":0}"#);
    assert_eq!(a, b);
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    let c = cfg(r#"{"seed":0,"ell":16,"experiment":"games"}"#);
    assert_eq!(a.canonical_json(), c.canonical_json());
}

#[test]
fn csv_headers_are_pinned() {
    let cases: &[(&str, &str)] = &[
        (
            r#"{"experiment":"correctness","mode":"strong"}"#,
            "index,class0,class1,comp,comp_ciph,agree",
        ),
        (
            r#"{"experiment":"correctness","mode":"weak"}"#,
            "index,m0,m1,expected,got",
        ),
        (
            r#"{"experiment":"correctness","mode":"decryption"}"#,
            "index,message,decrypted",
        ),
        (
            r#"{"experiment":"trace"}"#,
            "trial,well_spaced,error,accused,good_and_untraced",
        ),
        (
            r#"{"experiment":"games"}"#,
            "game,trials,advantage,ci_lo,ci_hi",
        ),
        (
            r#"{"experiment":"hybrid","mode":"sampled"}"#,
            "trial,q,left,right,hybrids,ok",
        ),
        (
            r#"{"experiment":"validsig","mode":"learn"}"#,
            "distribution,trial,bottom,error,good",
        ),
        (
            r#"{"experiment":"validsig","mode":"trace"}"#,
            "trial,dropped,bottom,accused",
        ),
        (
            r#"{"experiment":"validsig","mode":"forge"}"#,
            "learner,trials,attempts,wins,value",
        ),
    ];
    for (text, header) in cases {
        let mut c = cfg(text);
        c.trials = 0;
        let r = harness::run(&c).unwrap();
        assert_eq!(r.tables[0].to_csv().unwrap().trim_end(), *header, "{text}");
    }
}

#[test]
fn reports_write_json_and_csv() {
    let dir = std::env::temp_dir().join(format!("ore-learn-harness-{}", std::process::id()));
    let r = harness::run(&cfg(
        r#"{"experiment":"games","mode":"identical","trials":50,"seed":3}"#,
    ))
    .unwrap();
    let written = r.write(&dir, OutputFormat::Both).unwrap();
    assert!(written
        .iter()
        .any(|p| p.extension().is_some_and(|e| e == "json")));
    assert!(written
        .iter()
        .any(|p| p.extension().is_some_and(|e| e == "csv")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&written[0]).unwrap()).unwrap();
    assert_eq!(json["config_hash"], r.config_hash);
    assert_eq!(json["experiment"], "games");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn trial_streams_are_stable_and_separate() {
    let mut a = derive_trial_rng(42, 7);
    let mut b = derive_trial_rng(42, 7);
    assert_eq!(a.next_u64(), b.next_u64());
    assert_ne!(trial_seed(42, 7), trial_seed(42, 8));
    assert_ne!(trial_seed(42, 7), trial_seed(43, 7));
    let parent = trial_seed(1, 1);
    assert_ne!(
        stream_seed(&parent, "bucket", 0),
        stream_seed(&parent, "bucket", 1)
    );
    assert_ne!(
        stream_seed(&parent, "bucket", 0),
        stream_seed(&parent, "key", 0)
    );
    // Length-prefixed labels keep label/index boundaries unambiguous.
    assert_ne!(stream_seed(&parent, "a", 0), stream_seed(&parent, "", 0));
    let mut s1 = derive_stream(&parent, "bucket", 3);
    let mut s2 = derive_stream(&parent, "bucket", 3);
    assert_eq!(s1.next_u64(), s2.next_u64());
}

#[test]
fn fewer_trials_reproduce_a_prefix_of_rows() {
    let long = harness::run(&cfg(r#"{"experiment":"sq","ell":8,"trials":6,"seed":12}"#)).unwrap();
    let short = harness::run(&cfg(r#"{"experiment":"sq","ell":8,"trials":3,"seed":12}"#)).unwrap();
    assert_eq!(&long.tables[0].rows[..3], &short.tables[0].rows[..]);
}
