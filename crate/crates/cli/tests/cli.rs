mod common;

use std::fs;

use common::{code, ltl, read_csv, schema, stderr, stdout, validate};
use serde_json::Value;
use tempfile::TempDir;

fn tmp() -> TempDir {
    tempfile::tempdir().unwrap()
}

fn manifest(dir: &TempDir, stem: &str) -> Value {
    let text = fs::read_to_string(dir.path().join(format!("{stem}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn successful_run_writes_outputs_and_a_valid_manifest() {
    let d = tmp();
    let o = ltl(d.path(), &["iterate", "--n", "2", "--n-points", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&d.path().join("iterate.csv"));
    assert_eq!(header, ["iterate", "u", "v"]);
    assert_eq!(rows.len(), 15);
    let m = manifest(&d, "iterate");
    validate(&m, &schema(), "$").unwrap();
    assert_eq!(m["command"], "iterate");
    assert_eq!(m["parameters"]["n"], "2");
    assert_eq!(m["outputs"], serde_json::json!(["iterate.csv"]));
}

#[test]
fn every_command_manifest_matches_the_schema() {
    let runs: [&[&str]; 6] = [
        &["verify", "bounds", "--grid", "16"],
        &["verify", "condition-w", "--grid", "32"],
        &["verify", "cones", "--samples", "2000"],
        &["diagnose", "lyapunov", "--steps", "2000", "--burn-in", "10"],
        &["diagnose", "alignment", "--steps", "200", "--burn-in", "10", "--direction", "inverse"],
        &["diagnose", "mixing", "--cells", "16", "--iters", "2", "--samples", "100000"],
    ];
    let s = schema();
    for args in runs {
        let d = tmp();
        let o = ltl(d.path(), args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let stem = fs::read_dir(d.path())
            .unwrap()
            .filter_map(|e| e.unwrap().file_name().into_string().ok())
            .find_map(|n| n.strip_suffix(".manifest.json").map(str::to_string))
            .expect("manifest written");
        let m = manifest(&d, &stem);
        validate(&m, &s, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
        for out in m["outputs"].as_array().unwrap() {
            assert!(d.path().join(out.as_str().unwrap()).is_file());
        }
    }
}

#[test]
fn schema_check_rejects_bad_manifests() {
    let s = schema();
    let good = serde_json::json!({
        "command": "verify cones", "parameters": {"samples": "10"}, "seed": 3,
        "timestamp": "2026-01-02T03:04:05.678Z", "code_version": "0.1.0", "outputs": ["cones.csv"]
    });
    validate(&good, &s, "$").unwrap();
    let mut extra = good.clone();
    extra["note"] = "x".into();
    assert!(validate(&extra, &s, "$").is_err());
    let mut cmd = good.clone();
    cmd["command"] = "replay".into();
    assert!(validate(&cmd, &s, "$").is_err());
    let mut seed = good.clone();
    seed["seed"] = (-1).into();
    assert!(validate(&seed, &s, "$").is_err());
    let mut missing = good;
    missing.as_object_mut().unwrap().remove("timestamp");
    assert!(validate(&missing, &s, "$").is_err());
}

#[test]
fn zero_iterates_return_the_input() {
    let d = tmp();
    let input = d.path().join("pts.csv");
    fs::write(&input, "u,v\n1.3,0.0\n-1.25,0.5\n0.0,-1.9\n").unwrap();
    let o = ltl(d.path(), &["iterate", "--map", "theta", "--n", "0", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = read_csv(&d.path().join("iterate.csv"));
    let got: Vec<(f64, f64)> = rows.iter().map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(got, [(1.3, 0.0), (-1.25, 0.5), (0.0, -1.9)]);
}

#[test]
fn planar_twist_panel_a_is_a_horizontal_segment() {
    let d = tmp();
    let o = ltl(d.path(), &["iterate", "--figure", "planar-twist"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = read_csv(&d.path().join("planar_twist_a.csv"));
    assert_eq!(header, ["u", "v"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    for panel in ["b", "c"] {
        assert!(d.path().join(format!("planar_twist_{panel}.csv")).is_file());
    }
}

#[test]
fn malformed_input_names_the_line() {
    let cases = [
        ("u,v\n1.3,0.0\n1.3\n", "line 3"),
        ("u,v\n1.3,0.0\nx,0.1\n", "line 3"),
        ("x,y\n1.3,0.0\n", "line 1"),
        ("u,v\n1.3,0.0\n1.3,0.0\n0.0,0.0\n", "line 4"),
        ("u,v\n1.3,NaN\n", "line 2"),
    ];
    for (text, want) in cases {
        let d = tmp();
        let input = d.path().join("bad.csv");
        fs::write(&input, text).unwrap();
        let o = ltl(d.path(), &["iterate", "--input", input.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{text:?}");
        assert!(stderr(&o).contains(want), "{text:?}: {}", stderr(&o));
        assert!(!d.path().join("iterate.csv").exists());
    }
}

#[test]
fn exit_codes_separate_usage_violation_and_numerical_failure() {
    let d = tmp();
    assert_eq!(code(&ltl(d.path(), &["iterate", "--no-such-flag"])), 2);
    assert_eq!(code(&ltl(d.path(), &["verify", "bounds", "--r0", "1.5", "--r1", "1.2"])), 2);
    assert_eq!(code(&ltl(d.path(), &["diagnose", "mixing", "--cells", "4"])), 2);

    let v = ltl(d.path(), &["verify", "bounds", "--r0", "1.2", "--r1", "3.0", "--grid", "32"]);
    assert_eq!(code(&v), 1, "{}", stderr(&v));
    assert!(stderr(&v).contains("violation"));
    assert!(d.path().join("bounds.manifest.json").is_file());

    let n = ltl(d.path(), &["diagnose", "stretch", "--iters", "8", "--budget", "1000"]);
    assert_eq!(code(&n), 3, "{}", stderr(&n));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = tmp();
    let b = tmp();
    let args = ["diagnose", "lyapunov", "--orbits", "4", "--steps", "3000", "--burn-in", "100", "--seed", "7"];
    let one: Vec<&str> = args.iter().copied().chain(["--threads", "1"]).collect();
    let four: Vec<&str> = args.iter().copied().chain(["--threads", "4"]).collect();
    assert_eq!(code(&ltl(a.path(), &one)), 0);
    assert_eq!(code(&ltl(b.path(), &four)), 0);
    assert_eq!(fs::read(a.path().join("lyapunov.csv")).unwrap(), fs::read(b.path().join("lyapunov.csv")).unwrap());

    let cones = ["verify", "cones", "--samples", "20000", "--seed", "3"];
    let one: Vec<&str> = cones.iter().copied().chain(["--threads", "1"]).collect();
    let four: Vec<&str> = cones.iter().copied().chain(["--threads", "4"]).collect();
    assert_eq!(code(&ltl(a.path(), &one)), 0);
    assert_eq!(code(&ltl(b.path(), &four)), 0);
    assert_eq!(fs::read(a.path().join("cones.csv")).unwrap(), fs::read(b.path().join("cones.csv")).unwrap());
}

#[test]
fn replay_reproduces_outputs() {
    let d = tmp();
    let o =
        ltl(d.path(), &["diagnose", "mixing", "--cells", "16", "--iters", "3", "--samples", "100000", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let again = tmp();
    let m = d.path().join("mixing.manifest.json");
    let r = ltl(again.path(), &["replay", m.to_str().unwrap(), "--check"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).contains("byte for byte"));
    assert_eq!(fs::read(d.path().join("mixing.csv")).unwrap(), fs::read(again.path().join("mixing.csv")).unwrap());
}

#[test]
fn replay_check_flags_a_tampered_output() {
    let d = tmp();
    assert_eq!(code(&ltl(d.path(), &["iterate", "--n", "1", "--n-points", "4"])), 0);
    let path = d.path().join("iterate.csv");
    let mut bytes = fs::read(&path).unwrap();
    bytes.extend_from_slice(b"junk\r\n");
    fs::write(&path, bytes).unwrap();
    let again = tmp();
    let m = d.path().join("iterate.manifest.json");
    let r = ltl(again.path(), &["replay", m.to_str().unwrap(), "--check"]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("iterate.csv"));
}

#[test]
fn config_fills_options_and_flags_win() {
    let d = tmp();
    let cfg = d.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_points": 3, "n": 4, "seed": 9}"#).unwrap();
    let o = ltl(d.path(), &["iterate", "--n", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&d, "iterate");
    assert_eq!(m["parameters"]["n"], "1");
    assert_eq!(m["parameters"]["n-points"], "3");
    assert_eq!(m["seed"], 9);
    let (_, rows) = read_csv(&d.path().join("iterate.csv"));
    assert_eq!(rows.len(), 6);

    fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    assert_eq!(code(&ltl(d.path(), &["iterate", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn out_dir_comes_from_the_environment_when_not_given() {
    let d = tmp();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_ltl"))
        .args(["iterate", "--n-points", "2"])
        .env("LTL_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(d.path().join("iterate.csv").is_file());
}
