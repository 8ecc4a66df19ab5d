use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_anosovlab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["build"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", path_str(&out)]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn build_prints_certificates_for_every_kind() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, extra) in [
        ("fuchsian", vec![]),
        ("sym-power", vec!["--N", "4"]),
        ("direct-sum", vec![]),
        ("bent", vec!["--t", "0.1"]),
    ] {
        let out = dir.path().join(format!("{kind}.json"));
        let mut args = vec!["build", "--kind", kind];
        args.extend(extra.iter().copied());
        args.extend(["--out", path_str(&out)]);
        let o = run(&args);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let cert: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(cert["relator_residual"].as_f64().unwrap() < 1e-8, "{kind}: {cert}");
        assert!(out.exists());
    }
}

#[test]
fn build_rejects_other_genera_and_unbendable_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = run(&["build", "--kind", "fuchsian", "--genus", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "invalid_argument");
    let o = run(&["build", "--kind", "sym-power", "--N", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_direct_sum_fails_on_the_first_gap() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "ds.json", &["--kind", "direct-sum"]);
    let report = dir.path().join("r.json");
    let o = run(&["check", path_str(&rep), "--checks", "gap", "--out", path_str(&report)]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"gap_k1"), "{failing:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("gap_k1"));
}

#[test]
fn check_symmetric_power_passes_with_report_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let o = run(&["check", path_str(&rep), "--triples", "50", "--samples", "16", "--radius", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["seed"], 42);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn corrupted_or_missing_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    let entry = &mut v["generators"][0][1];
    *entry = serde_json::json!(entry.as_f64().unwrap() + 1e-3);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["check", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "construction");

    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["check", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "format");

    let o = run(&["check", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "io");
}

#[test]
fn invalid_options_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let r = path_str(&rep);
    for args in [
        vec!["check", r, "--radius", "11"],
        vec!["check", r, "--triples", "0"],
        vec!["check", r, "--checks", "nonsense"],
        vec!["check", r, "--tol", "bogus=1"],
        vec!["check", r, "--tol", "rank=-1"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(serde_json::from_slice::<Value>(&o.stderr).is_ok(), "{args:?}");
    }
}

#[test]
fn tolerance_overrides_reach_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let o = run(&["check", path_str(&rep), "--checks", "hk", "--triples", "10", "--samples", "8", "--tol", "rank=1e-9"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tolerances"]["rank"], 1e-9);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let args = ["check", path_str(&rep), "--checks", "hk", "--triples", "10", "--samples", "8"];
    let one = Command::new(BIN).args(args).env("ANOSOVLAB_THREADS", "1").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    let bad = Command::new(BIN).args(args).env("ANOSOVLAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn curve_csv_starts_at_zero_and_stays_in_the_cone() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let csv = dir.path().join("curve.csv");
    let o = run(&["curve", path_str(&rep), "--theta-x", "0.5", "--theta-z", "3.5", "--samples", "50", "--out", path_str(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "block,parameter,q11,q22,sqrt2_q12,min_eigenvalue");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let curve: Vec<_> = rows.iter().filter(|r| r[0] == "curve").collect();
    let cone: Vec<_> = rows.iter().filter(|r| r[0] == "cone").collect();
    assert_eq!(curve.len(), 50);
    assert_eq!(cone.len(), 50);
    let num = |s: &str| s.parse::<f64>().unwrap();
    assert_eq!(num(curve[0][1]), 0.5);
    assert!(curve[0][2..5].iter().all(|c| num(c).abs() < 1e-14));
    assert!(curve[1..].iter().all(|r| num(r[5]) > 0.0));
    let mantissa = curve[10][2].trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn curve_needs_a_symmetric_power_and_distinct_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let ds = build(dir.path(), "ds.json", &["--kind", "direct-sum"]);
    let o = run(&["curve", path_str(&ds), "--theta-x", "0.5", "--theta-z", "3.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "precondition");
    let eta = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let o = run(&["curve", path_str(&eta), "--theta-x", "1.0", "--theta-z", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_help_documents_the_columns() {
    let o = run(&["curve", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for col in ["block", "parameter", "q11", "sqrt2_q12", "min_eigenvalue", "17 significant digits"] {
        assert!(text.contains(col), "{col}");
    }
}

#[test]
fn report_diff_flags_changed_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let rep = build(dir.path(), "eta.json", &["--kind", "sym-power"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["--checks", "hk", "--triples", "10", "--samples", "8"];
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let mut args = vec!["check", path_str(&rep), "--seed", seed, "--out", path_str(out)];
        args.extend(base);
        assert_eq!(run(&args).status.code(), Some(0));
    }
    let o = run(&["report-diff", path_str(&a), path_str(&b)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("/config/seed"));
    let o = run(&["report-diff", path_str(&a), path_str(&a)]);
    assert_eq!(o.status.code(), Some(0));
}
