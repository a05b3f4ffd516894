//! Runs the `qlab` binary end to end.

use std::path::PathBuf;
use std::process::Command;

fn qlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qlab"));
    c.env("QLAB_THREADS", "2");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn spectrum_csv_has_fixed_columns() {
    let out = scratch("spectrum.csv");
    let st = qlab().args(["spectrum", "--n", "2", "--L", "3", "--format", "csv", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sector,state-index,E_direct,E_roots,E_TBox,max_bethe_residual"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn verify_json_is_deterministic_apart_from_timing() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    for p in [&a, &b] {
        let st = qlab().args(["verify", "--n", "2", "--L", "2", "--suite", "hirota,determinant", "--out"]).arg(p).status().unwrap();
        assert_eq!(st.code(), Some(0));
    }
    let strip = |p: &PathBuf| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        for r in v["records"].as_array_mut().unwrap() {
            r["wall_ms"] = serde_json::Value::from(0.0);
        }
        v
    };
    let (ja, jb) = (strip(&a), strip(&b));
    assert_eq!(ja, jb);
    assert!(ja["records"].as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, r#"{"n": 3, "L": 1, "suite": ["hirota"]}"#).unwrap();
    let out = scratch("cfg_out.json");
    let st = qlab().args(["verify", "--L", "2", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["L"], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(qlab().args(["verify", "--n", "5"]).output().unwrap().status.code(), Some(2));
    assert_eq!(qlab().args(["bogus"]).output().unwrap().status.code(), Some(2));
    let out = qlab().args(["verify", "--n", "2", "--L", "1", "--suite", "trace", "--tol", "1e-30", "--out", "-"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn twist_renormalization_warns() {
    let out = qlab().args(["hasse", "--n", "2", "--phi", "0.5,0.1", "--out", "-"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("warn"));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["hasse"]["quadrilaterals"].as_array().unwrap().len(), 1);
}
