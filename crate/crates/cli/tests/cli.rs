use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kato(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kato"));
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_contains_the_catalog() {
    let out = kato(&["list"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["coulomb_r3", "euclidean_m3", "hyperbolic_m3", "flux_cycle_3", "random_bundle_20"] {
        assert!(text.contains(id), "{id} missing");
    }
    let json: Value = serde_json::from_slice(&kato(&["list", "--json"], &[]).stdout).unwrap();
    assert!(json.as_array().unwrap().len() >= 20);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    for text in ["{}", "", "{\"command\": \"kato-test\", \"colour\": 1}", "{\"command\": \"fly\"}"] {
        let cfg = write_config(tmp.path(), text);
        let o = kato(&["run", "--config", &cfg, "--out", out], &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
    }
    // missing potential
    let cfg = write_config(tmp.path(), r#"{"command": "kato-test", "space": "euclidean_m3"}"#);
    assert_eq!(kato(&["run", "--config", &cfg, "--out", out], &[]).status.code(), Some(2));
    // invalid path configuration
    let cfg = write_config(
        tmp.path(),
        r#"{"command": "fk-mc", "space": "euclidean_m1", "path": {"t": 1, "h": 0.5, "n_paths": 100, "estimator": "kato"}}"#,
    );
    assert_eq!(kato(&["run", "--config", &cfg, "--out", out], &[]).status.code(), Some(2));
    // subcommand and config disagree
    assert_eq!(kato(&["spectrum", "--bundled", "coulomb_r3", "--out", out], &[]).status.code(), Some(2));
    assert_eq!(kato(&["run", "--bundled", "nope", "--out", out], &[]).status.code(), Some(2));
    assert_eq!(kato(&["run", "--out", out], &[]).status.code(), Some(2));
    assert_eq!(kato(&["frobnicate"], &[]).status.code(), Some(2));
}

#[test]
fn coulomb_kato_test_reports_member() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kato(&["kato-test", "--bundled", "coulomb_r3", "--reference", "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["kato"]["verdict"], "member");
    let eta = r["result"]["kato"]["eta"].as_array().unwrap();
    assert_eq!(eta.len(), 4);
    for g in eta {
        let t = g["at"].as_f64().unwrap();
        let want = 2.0 * (2.0 * t / std::f64::consts::PI).sqrt();
        assert!((g["value"].as_f64().unwrap() / want - 1.0).abs() < 1e-6);
        assert_eq!(g["provenance"], "quadrature");
    }
    let csv = std::fs::read_to_string(tmp.path().join("plot_eta.csv")).unwrap();
    assert!(csv.starts_with("x,y\n"));
    assert_eq!(csv.lines().count(), 5);
    assert!(tmp.path().join("resolvent.csv").exists());
}

#[test]
fn contract_violations_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"command": "kato-test", "space": "euclidean_m3", "potential": "inverse_square_r3", "expect": {"verdict": "member"}}"#,
    );
    let out = tmp.path().join("out");
    let o = kato(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert!(r["violations"][0].as_str().unwrap().starts_with("verdict"));

    let cfg = write_config(
        tmp.path(),
        r#"{"command": "spectrum", "mesh": {"dirichlet_path": {"interior": 5}}, "expect": {"lambda_min_at_least": 1.0}}"#,
    );
    assert_eq!(kato(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.code(), Some(1));
}

#[test]
fn check_inequalities_on_the_random_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kato(&["check-inequalities", "--bundled", "random_bundle_20", "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert!(r["result"]["kato_inequality"]["min_relative_gap"]["value"].as_f64().unwrap() >= -1e-12);
    assert!(r["result"]["domination"]["min_gap"]["value"].as_f64().unwrap() >= -1e-10);
    let gaps = std::fs::read_to_string(tmp.path().join("kato_gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 101);
}

#[test]
fn form_bounds_chain_on_the_coulomb_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kato(&["form-bounds", "--bundled", "coulomb_form_bounds", "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(tmp.path());
    assert!((r["result"]["c1"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((r["result"]["c2"]["value"].as_f64().unwrap() - 4.0).abs() < 1e-5);
    assert!(r["result"]["mesh"]["c1_mesh"]["value"].as_f64().unwrap() <= 0.55);
    assert!(r["result"]["mesh"]["lambda_min"]["value"].as_f64().unwrap() >= -4.0);
}

#[test]
fn explicit_configs_and_environment_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"command": "fk-mc", "space": {"kind": "euclidean", "dim": 1},
            "path": {"t": 1.0, "h": 0.01, "n_paths": 1000, "estimator": {"heat": {"observable": "squared_distance"}}},
            "seed": 5}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = kato(&["run"], &[("KATO_CONFIG", &cfg), ("KATO_OUT", a.to_str().unwrap()), ("KATO_SEED", "9")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&a)["seed"], 9);
    kato(&["run", "--config", &cfg, "--out", b.to_str().unwrap()], &[]);
    assert_eq!(report(&b)["seed"], 5);
    assert_ne!(
        report(&a)["result"]["fk"]["estimate"]["value"],
        report(&b)["result"]["fk"]["estimate"]["value"]
    );
}

fn provenance_everywhere(v: &Value, path: &str, missing: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            if map.get("value").is_some_and(|x| x.is_number() || x.is_null()) && !map.contains_key("provenance") {
                missing.push(path.to_string());
            }
            for (k, x) in map {
                provenance_everywhere(x, &format!("{path}.{k}"), missing);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                provenance_everywhere(x, &format!("{path}[{i}]"), missing);
            }
        }
        _ => {}
    }
}

#[test]
fn reports_are_deterministic_and_carry_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ["coulomb_r3", "flux_cycle_3", "random_bundle_20", "fk_coulomb", "fk_landau", "fk_survival"] {
        let a = tmp.path().join(format!("{id}_a"));
        let b = tmp.path().join(format!("{id}_b"));
        assert_eq!(kato(&["run", "--bundled", id, "--reference", "--out", a.to_str().unwrap()], &[]).status.code(), Some(0), "{id}");
        kato(&["run", "--bundled", id, "--workers", "3", "--out", b.to_str().unwrap()], &[]);
        let ra = std::fs::read(a.join("report.json")).unwrap();
        assert_eq!(ra, std::fs::read(b.join("report.json")).unwrap(), "{id}");
        let mut missing = Vec::new();
        provenance_everywhere(&serde_json::from_slice(&ra).unwrap(), id, &mut missing);
        assert!(missing.is_empty(), "{missing:?}");
    }
}
