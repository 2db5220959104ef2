//! End-to-end checks of the `drawdown-gs` binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_drawdown-gs"))
}

#[test]
fn preset_runs_to_stdout_and_is_byte_stable() {
    let run = || {
        let out = bin()
            .args(["exit", "--config", &write_config(EXIT_CONFIG), "--seed", "17"])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    assert!(first.contains("# command=exit"));
    assert!(first.contains("# seed=17"));
    assert!(first.lines().any(|l| l.starts_with("s,exit_prob")));
}

#[test]
fn prob_preset_writes_csv_file() {
    let dir = std::env::temp_dir().join(format!("dgs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig1a.csv");
    let out = bin()
        .args(["prob", "--preset", "fig1a", "--out", path.to_str().unwrap()])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# command=prob"));
    assert!(text.lines().any(|l| l.starts_with("x,case_i,case_ii,case_iii,case_iv")));
    // Grid from 1 to 10 in steps of 0.5 plus header/meta lines.
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 19);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_format_parses() {
    let out = bin()
        .args(["exit", "--config", &write_config(EXIT_CONFIG), "--format", "json"])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["meta"]["command"], "exit");
    assert!(parsed["rows"].as_array().unwrap().len() > 3);
}

#[test]
fn bad_invocations_fail_cleanly() {
    // Unknown preset.
    let out = bin().args(["prob", "--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
    // Mismatched command vs experiment.
    let out = bin().args(["tax", "--preset", "fig1a"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("'prob' experiment"));
    // Missing config source.
    let out = bin().args(["prob"]).output().unwrap();
    assert!(!out.status.success());
}

const EXIT_CONFIG: &str = r#"{
    "model": {"family": "cramer_lundberg", "c": 1.1, "lambda0": 2.0, "mu_claim": 2.0},
    "experiment": {"command": "exit", "x": 1.0, "q": 0.3,
                   "s": {"start": 1.5, "stop": 5.0, "step": 0.5}}
}"#;

fn write_config(text: &str) -> String {
    let path = std::env::temp_dir().join(format!(
        "dgs-cfg-{}-{}.json",
        std::process::id(),
        text.len()
    ));
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}
