use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"{
  "budgets": {"n_min": 4, "n_max": 9, "target_count": 512, "segments": 100,
              "n_seeds": 40, "n_sample": 2000, "bootstrap": 100, "l_n_max": 6},
  "ldp": {"samples": 2000, "n_grid": [10, 20]},
  "shadow": {"orbits": 4, "length": 40}
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_da-thermo"));
    c.env_remove("DA_THERMO_OUT");
    c
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("job.json");
    fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, out: &Path, args: &[&str]) -> Output {
    bin().arg("--config").arg(cfg).arg("--out").arg(out).args(args).output().unwrap()
}

fn manifests(out: &Path, prefix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(out.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with(prefix))
        .collect();
    v.sort();
    v
}

fn manifest(out: &Path, prefix: &str) -> Value {
    let m = manifests(out, prefix);
    assert_eq!(m.len(), 1, "{m:?}");
    serde_json::from_slice(&fs::read(&m[0]).unwrap()).unwrap()
}

fn artifact(out: &Path, m: &Value, name: &str) -> Vec<u8> {
    let a = m["artifacts"].as_array().unwrap().iter().find(|a| a["name"] == name).unwrap();
    fs::read(out.join(a["file"].as_str().unwrap())).unwrap()
}

#[test]
fn theorem_a_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &["criteria", "theorem-a"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out, "criteria-theorem-a-");
    let report: Value = serde_json::from_slice(&artifact(&out, &m, "report.json")).unwrap();
    assert!(["holds", "fails", "inconclusive"].contains(&report["verdict"].as_str().unwrap()));
    assert_eq!(m["config"]["budgets"]["n_max"], 9);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["versions"]["core"].is_string());
}

#[test]
fn pressure_curve_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&cfg, out, &["--workers", "2", "pressure-curve"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ma = manifest(&a, "pressure-curve-");
    let mb = manifest(&b, "pressure-curve-");
    let csv = artifact(&a, &ma, "pressure-curve.csv");
    assert_eq!(csv, artifact(&b, &mb, "pressure-curve.csv"));
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.split("\r\n").filter(|l| !l.is_empty());
    assert_eq!(lines.next().unwrap(), "t,P_est,P_lower,fit_r2");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let cols: Vec<f64> = r.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[2] <= cols[1]);
    }
    assert!(ma["summary"]["root"]["root"].as_f64().is_some());
}

#[test]
fn workers_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&cfg, &a, &["--workers", "1", "ldp"]).status.success());
    assert!(run(&cfg, &b, &["--workers", "3", "ldp"]).status.success());
    let (ma, mb) = (manifest(&a, "ldp-"), manifest(&b, "ldp-"));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(artifact(&a, &ma, "ldp.csv"), artifact(&b, &mb, "ldp.csv"));
}

#[test]
fn schema_violation_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), r#"{"budgets": {"n_max": "many"}}"#);
    let o = run(&cfg, &out, &["pressure"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budgets.n_max"));

    let cfg = write_config(dir.path(), r#"{"map": {"kind": "linear", "matrix": [[1,0,0],[0,1,0],[0,0,1]]}}"#);
    let o = run(&cfg, &out, &["spectral"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("map.matrix"));

    let cfg = write_config(dir.path(), r#"{"ldp": {"psi": "cos(x"}}"#);
    let o = run(&cfg, &out, &["ldp"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ldp.psi"));
}

#[test]
fn numerical_rejection_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"budgets": {"max_orbit_points": 1000}}"#);
    let o = run(&cfg, &dir.path().join("out"), &["pressure"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pressure"));
}

#[test]
fn cache_and_append_only_store() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &["criteria", "delta-gap"]).status.success());
    let first = manifests(&out, "criteria-delta-gap-");
    let before = fs::read(&first[0]).unwrap();

    let o = run(&cfg, &out, &["criteria", "delta-gap"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cached"));
    assert_eq!(o.stdout, before);
    assert_eq!(manifests(&out, "criteria-delta-gap-").len(), 1);

    assert!(run(&cfg, &out, &["--no-cache", "criteria", "delta-gap"]).status.success());
    let all = manifests(&out, "criteria-delta-gap-");
    assert_eq!(all.len(), 2);
    assert_eq!(fs::read(&first[0]).unwrap(), before);
    let objects = fs::read_dir(out.join("objects")).unwrap().count();
    assert_eq!(objects, 1, "identical artifact stored once");

    // A different seed is a different config.
    assert!(run(&cfg, &out, &["--seed", "99", "criteria", "delta-gap"]).status.success());
    assert_eq!(manifests(&out, "criteria-delta-gap-").len(), 3);
}

#[test]
fn output_root_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let o = bin().env("DA_THERMO_OUT", &out).args(["criteria", "threshold-T"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out, "criteria-threshold-T-");
    assert!(m["summary"]["T"].as_f64().unwrap() >= 0.0);
}

#[test]
fn every_command_runs_on_small_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    for args in [
        &["spectral"][..],
        &["build-map"],
        &["pressure"],
        &["decompose-audit"],
        &["criteria", "bounded-range"],
        &["criteria", "srb"],
        &["lyapunov"],
        &["srb"],
        &["spectrum"],
        &["shadow"],
        &["glue"],
    ] {
        let o = run(&cfg, &out, args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let glue = manifest(&out, "glue-");
    assert_eq!(glue["summary"]["verified"], true);
    let shadow = manifest(&out, "shadow-");
    assert_eq!(shadow["summary"]["within_bound"], true);
    let lyap = manifest(&out, "lyapunov-");
    assert!(lyap["summary"]["sum"].as_f64().unwrap().abs() < 1e-8);
}
