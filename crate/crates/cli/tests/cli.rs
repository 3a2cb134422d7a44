use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ore-learn"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ore-learn-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn runs_and_writes_reports() {
    let out = scratch("games");
    let o = bin()
        .args([
            "games",
            "--mode",
            "identical",
            "--trials",
            "200",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("games identical config="), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("games_identical.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["trials"], 200);
    assert_eq!(json["config"]["seed"], 3);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn config_file_with_flag_overrides() {
    let out = scratch("sq");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment":"sq","ell":8,"trials":2,"seed":1}"#).unwrap();
    let o = bin()
        .args(["sq", "--trials", "3", "--format", "json", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sq_exact.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["trials"], 3);
    assert_eq!(json["config"]["ell"], 8);
    assert!(!out.join("sq_exact_rows.csv").exists());
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn bad_config_exits_with_2() {
    let o = bin().args(["sq", "--mode", "loud"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode"));

    let out = scratch("mismatch");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment":"pac"}"#).unwrap();
    let o = bin().arg("sq").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&out).unwrap();
}
