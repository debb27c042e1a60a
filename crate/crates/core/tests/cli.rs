use std::path::Path;
use std::process::{Command, Output};

use tsallis_mono::states::{ghz, StateJson};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsallis-mono"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_bell_subadditivity() {
    let dir = tempfile::tempdir().unwrap();
    let json = serde_json::to_string(&StateJson::from_pure(&ghz(2).unwrap())).unwrap();
    let path = write(dir.path(), "bell.json", &json);
    let out = bin(&["check", &path, "-i", "subadditivity", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "HOLDS");
    assert!((report["slack"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(report["state_descriptor"].as_str().unwrap().ends_with("bell.json"));
}

#[test]
fn check_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"dims\": [2], \"re\": [1,");
    let out = bin(&["check", &bad, "-i", "ckw"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let unnormalized = write(dir.path(), "n.json", r#"{"dims": [2, 2], "re": [1, 0, 0, 1]}"#);
    let out = bin(&["check", &unnormalized, "-i", "subadditivity", "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema error") && err.contains("deviates from 1 by"), "{err}");

    let out = bin(&["check", "/nonexistent/state.json", "-i", "ckw"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let ghz3 = serde_json::to_string(&StateJson::from_pure(&ghz(3).unwrap())).unwrap();
    let path = write(dir.path(), "ghz.json", &ghz3);
    let out = bin(&["check", &path, "-i", "gen-monogamy", "--q", "3", "--partition", "1|0"]);
    assert_eq!(out.status.code(), Some(0));
    // A negative tolerance turns even an exact equality into a violation.
    let out = bin(&["check", &path, "-i", "ckw", "--tolerance=-2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin(&["check", &path, "-i", "tsallis-monogamy", "--q", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_mixed_reciprocity() {
    let dir = tempfile::tempdir().unwrap();
    let m = tsallis_mono::states::random_mixed_on(&[2, 2, 2], 2, tsallis_mono::Seed::new(3, 3)).unwrap();
    let path = write(dir.path(), "m.json", &serde_json::to_string(&StateJson::from_density(&m)).unwrap());
    let out = bin(&["check", &path, "-i", "reciprocity", "--q", "2", "--partition", "0|1|2"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_ne!(report["verdict"], "VIOLATED");
    assert_eq!(report["lhs_bound"], "upper");
}

#[test]
fn sample_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("rows.csv");
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"inequalities": ["gen-monogamy"], "n_qubits": 4, "samples": 50, "q_values": [2.0], "master_seed": 1, "out": {:?}}}"#,
            out_csv.to_str().unwrap()
        ),
    );
    let out = bin(&["sample", "--config", &cfg, "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.starts_with("name,q,lhs,rhs,slack,verdict,lhs_bound,rhs_bound,seed,stream\n"));
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("gen-monogamy") && summary.contains("violated     0"), "{summary}");

    let zero = write(dir.path(), "zero.json", r#"{"inequalities": ["ckw"], "samples": 0}"#);
    let out = bin(&["sample", "--config", &zero]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn sample_json_format() {
    let out = bin(&["sample", "-i", "multiparty-polygamy", "--q", "1.5,3.5", "--samples", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[1]["q"], 3.5);
}

#[test]
fn scan_q_fq_gap_regimes() {
    let out = bin(&["scan-q", "-i", "fq-gap", "--q-min", "1", "--q-max", "2", "--q-step", "0.25", "--grid", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let max_gap: f64 = rec[2].parse().unwrap();
        assert!(max_gap <= 1e-12, "{rec:?}");
        assert_eq!(&rec[5], "true");
    }
    let out = bin(&["scan-q", "-i", "fq-gap", "--q-min", "3.5", "--q-max", "4.5"]);
    assert_eq!(out.status.code(), Some(1));
}
