use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grandlp::measure::{LpNorm, RadialFunction, WeightedSpace};
use grandlp::verify::{representation, two_sided, SuiteReport};
use grandlp::PsiSpec;
use proptest::prelude::*;
use serde_json::{json, Value};

fn grandlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grandlp")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn powerlog_2_4(dir: &Path) -> PathBuf {
    write(
        dir,
        "powerlog_2_4.json",
        &json!({"form": "power_log", "A": 2.0, "B": 4.0, "gamma": 1.0, "delta": 1.0, "L": {"kind": "unit"}}),
    )
}

#[test]
fn boyd_of_power_log() {
    let dir = tempfile::tempdir().unwrap();
    let psi = powerlog_2_4(dir.path());
    let o = grandlp(&["boyd", "--psi", s(&psi)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["gamma1"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["gamma2"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let single_dash = grandlp(&["boyd", "-psi", s(&psi)]);
    assert_eq!(single_dash.stdout, o.stdout);
}

#[test]
fn norm_of_representation_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let space = WeightedSpace::euclidean(1);
    let f = two_sided(&space, 1.5, 4.0, 0.5, 0.0);
    let psi = PsiSpec::from(&representation(&f, &space, 1.5, 4.0).unwrap());
    let fp = write(dir.path(), "f.json", &serde_json::to_value(&f).unwrap());
    let pp = write(dir.path(), "psi.json", &serde_json::to_value(&psi).unwrap());
    let o = grandlp(&["norm", "-f", s(&fp), "-psi", s(&pp)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!((v["norm"].as_f64().unwrap() - 1.0).abs() <= 1e-6, "{v}");
    let back: RadialFunction = serde_json::from_str(&std::fs::read_to_string(&fp).unwrap()).unwrap();
    assert_eq!(back.lp(&space, 2.0).unwrap(), f.lp(&space, 2.0).unwrap());
}

#[test]
fn psi_output_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let psi = powerlog_2_4(dir.path());
    let out = dir.path().join("derived.json");
    let o = grandlp(&["psi", "--op", "mult_inf", "--lhs", s(&psi), "--rhs", s(&psi), "--at", "1.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["domain"], json!([1.0, 2.0]));
    assert!(v["values"][0]["value"].as_f64().unwrap() > 0.0);
    let o = grandlp(&["boyd", "--psi", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let b = stdout_json(&o);
    assert!((b["gamma1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn phi_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let psi = write(
        dir.path(),
        "psi.json",
        &json!({"form": "power_log", "A": 1.0, "B": 2.0, "gamma": 0.0, "delta": 0.1}),
    );
    let o = grandlp(&["phi", "--psi", s(&psi), "--delta", "1e-6"]);
    let v = stdout_json(&o);
    assert!((v["ratio"].as_f64().unwrap() / 2f64.sqrt() - 1.0).abs() < 0.01);
}

#[test]
fn empty_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", &json!({"seed": 1, "checks": []}));
    let out = dir.path().join("out");
    let o = grandlp(&["suite", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: SuiteReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.pass && r.entries.is_empty());
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), o.stdout);
}

#[test]
fn failing_entry_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        &json!({"checks": [{"kind": "convolution", "b1": 4, "b2": 4}, {"kind": "young_constant", "samples": 50}]}),
    );
    let out = dir.path().join("out");
    let o = grandlp(&["suite", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let r: SuiteReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.entries[0].error.as_ref().unwrap().name, "RejectedInput");
    assert!(r.entries[1].pass);
    let csv = std::fs::read_to_string(out.join("01_young_constant.csv")).unwrap();
    assert!(csv.starts_with("p_or_t,value,model_value\n"));
    assert!(out.join("00_convolution.csv").exists());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(grandlp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(grandlp(&["boyd"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let o = grandlp(&["boyd", "--psi", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MalformedJson"));
    let inverted = write(dir.path(), "inv.json", &json!({"form": "power_log", "A": 4.0, "B": 2.0, "gamma": 1.0, "delta": 1.0}));
    let o = grandlp(&["boyd", "--psi", s(&inverted)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RejectedInput"));
    let missing = grandlp(&["boyd", "--psi", "/nonexistent/psi.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_grandlp"))
        .args(["suite"])
        .env("GRANDLP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_format_single_check() {
    let o = grandlp(&["sharpness", "--which", "sobolev", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p_or_t,value,model_value"));
    assert_eq!(lines.count(), 22);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exit_code_contract(kinds in proptest::collection::vec(0usize..3, 0..4)) {
        let checks: Vec<Value> = kinds
            .iter()
            .map(|k| match k {
                0 => json!({"kind": "young_constant", "samples": 20}),
                1 => json!({"kind": "convolution", "b1": 4, "b2": 4}),
                _ => json!({"kind": "phi_index", "b": 2.0, "delta": 0.5}),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.json", &json!({"seed": 7, "checks": checks}));
        let o = grandlp(&["suite", "--config", s(&cfg)]);
        let r: SuiteReport = serde_json::from_slice(&o.stdout).unwrap();
        prop_assert_eq!(r.entries.len(), kinds.len());
        prop_assert_eq!(o.status.code(), Some(if r.pass { 0 } else { 1 }));
        prop_assert_eq!(r.pass, !kinds.contains(&1) && !kinds.contains(&2));
    }
}
