use std::process::Command;

use serde_json::Value;

fn run(config: &std::path::Path, args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_caseforge"))
        .arg("--config")
        .arg(config)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn generate_score_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("caseforge.toml");
    let db = dir.path().join("cases.db");
    std::fs::write(&cfg, format!("store_path = {:?}\nfixed_clock = true\n", db.to_str().unwrap())).unwrap();

    let (ok, out, err) = run(&cfg, &["generate", "--disorder", "articulation", "--grade", "2nd", "--seed", "3"]);
    assert!(ok, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let id = v["record"]["case_id"].as_str().unwrap().to_string();

    // The store persists across processes.
    let (ok, out, err) = run(&cfg, &["score", &id]);
    assert!(ok, "{err}");
    let s: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(s["case_id"], id.as_str());

    let (ok, out, _) = run(&cfg, &["report", "quality"]);
    assert!(ok);
    let rows: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rows[0]["n"], 1);

    let (ok, out, _) = run(&cfg, &["export", &id, "--format", "csv"]);
    assert!(ok);
    assert!(out.starts_with("section,item,name"));

    let (ok, _, err) = run(&cfg, &["export", "missing-id"]);
    assert!(!ok);
    assert!(err.contains("not_found"), "{err}");
}
