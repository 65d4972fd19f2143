use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdw-contact")).args(args).output().unwrap()
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("JSON record on stderr");
    serde_json::from_str(line).unwrap()
}

fn write(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

#[test]
fn residuals_grid_csv() {
    let out = run(&["residuals", "--a", "2", "--b", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "S[energy/temperature]");
    let rel = header.iter().position(|h| *h == "eos_rel[1]").unwrap();
    let rows: Vec<&str> = lines.clone().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let v: f64 = row.split(',').nth(rel).unwrap().parse().unwrap();
        assert!(v < 1e-12);
    }
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# provenance,command=residuals,config_sha256="));
    assert!(footer.contains(",seed=20181114,"));
    assert!(footer.ends_with(concat!("version=", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn transform_json_at_known_point() {
    let out = run(&["transform", "--a", "2", "--b", "1", "--point", "0,2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], "1");
    let row = &v["rows"][0];
    for (key, want) in [("x", 0.0), ("y", 0.0), ("p_x", 2.0 / 3.0), ("p_y", -2.0 / 3.0), ("U", 0.0)] {
        assert!((row[key].as_f64().unwrap() - want).abs() < 1e-15, "{key}");
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.json");
    write(
        &cfg,
        r#"{"command": "eval", "gas": {"a": 2, "b": 1}, "seed": 5, "format": "json",
            "points": [{"s": 0, "v": 2}, {"s": 1, "v": 3}]}"#,
    );
    let status = run(&["--config", cfg.to_str().unwrap(), "--seed", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "eval");
    assert_eq!(v["provenance"]["seed"], 6);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    // U(0, 2) = 1 - 2/2 for P1
    assert!(v["rows"][0]["U"].as_f64().unwrap().abs() < 1e-15);

    // the command line wins over the file
    let csv = run(&["transform", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("S[energy/temperature],V[volume],x[1]"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = run(&[
            "toda",
            "--n-sites",
            "8",
            "--n-steps",
            "3000",
            "--ensemble-size",
            "3",
            "--seed",
            "99",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(matches!(out.status.code(), Some(0) | Some(2)));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    // a different seed changes the data
    let other = run(&["toda", "--n-sites", "8", "--n-steps", "3000", "--ensemble-size", "3", "--seed", "98"]);
    assert_ne!(other.stdout, a);
}

#[test]
fn validation_errors_exit_one_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"gas": {"a": 2, "bee": 1}}"#);
    let out = run(&["eval", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"]["code"], "config_parse");
    assert_eq!(rec["error"]["field"], "config");

    let out = run(&["eval", "--u0", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"]["field"], "gas.u0");

    let out = run(&["transform", "--point", "0,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"]["code"], "chart_domain");

    let out = run(&["sweep", "--temperatures", "0.01,0.01,0.01", "--n-steps", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"]["code"], "degenerate_fit");

    let out = run(&["sweep", "--temperatures", "0.01,0.02", "--n-steps", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"]["field"], "toda.temperatures");

    let out = run(&["residuals", "--tol", "eos"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"]["code"], "usage");
}

#[test]
fn perturbed_model_fails_checks() {
    let clean = run(&["contact-check", "--a", "2", "--b", "1"]);
    assert_eq!(clean.status.code(), Some(0));
    let out = run(&["contact-check", "--a", "2", "--b", "1", "--perturb-pressure", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["status"], "check_failed");
    assert_eq!(rec["check"]["name"], "pullback");
    let worst = rec["check"]["worst_row"].as_u64().unwrap() as usize;
    // the worst row is also the one with the largest dV defect in the table
    let text = String::from_utf8(out.stdout).unwrap();
    let defects: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    let argmax = (0..defects.len()).max_by(|&i, &j| defects[i].total_cmp(&defects[j])).unwrap();
    assert_eq!(worst, argmax);
    assert_eq!(rec["row"]["pullback_dV"].as_f64().unwrap(), defects[argmax]);

    // a tolerance override can make the same run pass
    let loose = run(&["contact-check", "--a", "2", "--b", "1", "--perturb-pressure", "1e-3", "--tol", "pullback=1"]);
    assert_eq!(loose.status.code(), Some(0));
}

#[test]
fn sweep_reports_fit_summary() {
    let out = run(&[
        "sweep",
        "--n-sites",
        "8",
        "--n-steps",
        "5000",
        "--ensemble-size",
        "4",
        "--format",
        "json",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    for key in ["slope", "intercept", "r_squared"] {
        assert!(v["summary"][key]["value"].is_number(), "{key}");
    }
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["slope", "r_squared", "intercept", "velocity_z"]);
}
