use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lorlen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorlen")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const CYLINDER: &str = r#"{"sigma": {"type": "circle", "L": 1.0}, "window": [0, 3], "mode": {"poisson": {"density": 120}}, "seed": 3}"#;
const CYLINDER_GRID: &str =
    r#"{"sigma": {"type": "circle", "L": 1.0}, "window": [-4, 4], "mode": {"grid": {"nx": 8, "nt": 65}}, "step_radius": 0.3}"#;
const DIAMOND: &str = r#"{"sigma": {"type": "interval", "L": 2.0}, "window": [0, 2], "mode": {"poisson": {"density": 300}},
    "region": {"diamond": {"lo": {"x": "1", "t": 0}, "hi": {"x": "1", "t": 2}}}, "seed": 1}"#;

#[test]
fn tau_matches_closed_form() {
    let out = lorlen(&["tau", "--at", "x=0.2,s=0;y=0.7,t=5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let tau = v["tau"].as_f64().unwrap();
    assert!((tau - (25.0f64 - 0.25).sqrt()).abs() < 1e-12, "{v}");
    assert_eq!(v["chron"], true);

    let out = lorlen(&["tau", "--at", "0,0;0.5,0.5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tau"].as_f64(), Some(0.0));
    assert_eq!((v["causal"].as_bool(), v["chron"].as_bool()), (Some(true), Some(false)));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(code(&lorlen(&["tau", "--at", "0,0"])), 1);
    assert_eq!(code(&lorlen(&["axioms", "-i", "/nonexistent/dump.json"])), 1);
}

#[test]
fn sprinkle_axioms_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CYLINDER);
    let dump = dir.path().join("dump.json");
    let out = lorlen(&["sprinkle", "-c", &cfg, "-o", dump.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let d = read_json(&dump);
    assert!(d["events"].as_array().unwrap().len() > 200);
    assert!(d["space"].is_object());

    let report = dir.path().join("axioms.json");
    let out = lorlen(&["axioms", "-i", dump.to_str().unwrap(), "-o", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&report)["status"], "pass");

    let classes = dir.path().join("classes.json");
    let out = lorlen(&["boundary", "-i", dump.to_str().unwrap(), "--margin", "auto", "-o", classes.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&classes)["count"], 1);
}

#[test]
fn diamond_boundary_is_a_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", DIAMOND);
    let dump = dir.path().join("dump.json");
    assert_eq!(code(&lorlen(&["sprinkle", "-c", &cfg, "-o", dump.to_str().unwrap()])), 0);
    let dump = dump.to_str().unwrap();
    assert_eq!(code(&lorlen(&["boundary", "-i", dump, "--margin", "auto", "--expect", "fail"])), 2);
    assert_eq!(code(&lorlen(&["boundary", "-i", dump, "--margin", "auto"])), 1);
}

#[test]
fn line_on_a_grid_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CYLINDER_GRID);
    let chain = dir.path().join("chain.json");
    let out = lorlen(&["line", "-c", &cfg, "--from", "0.25,-4", "--to", "0.25,4", "--family", "1,2,4", "-o", chain.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c = read_json(&chain);
    assert_eq!(c["length"].as_f64(), Some(8.0));
    assert_eq!(c["kind"], "chron");

    let out = lorlen(&["line", "-c", &cfg, "--from", "0.25,-4", "--to", "0.25,4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // Oblique pairs are only approximated by grid chains.
    assert_eq!(code(&lorlen(&["line", "-c", &cfg, "--from", "0.25,-4", "--to", "0.75,4"])), 1);
    assert_eq!(code(&lorlen(&["line", "-c", &cfg, "--from", "0.25,-4", "--to", "0.75,4", "--expect", "fail"])), 2);
}

#[test]
fn curvature_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let cyl = write(dir.path(), "cyl.json", CYLINDER);
    let report = dir.path().join("report.json");
    let out =
        lorlen(&["certify", "curvature", "-c", &cyl, "--triangles", "16", "--grid", "4", "--tol", "1e-6", "-o", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&report)["violation_count"], 0);

    let tripod = write(
        dir.path(),
        "tripod.json",
        r#"{"sigma": {"type": "tripod", "legs": [1.0, 1.0, 1.0]}, "window": [0, 10], "mode": {"poisson": {"density": 10}}}"#,
    );
    let args = ["certify", "curvature", "-c", &tripod, "--triangles", "64", "--sampler", "straddle", "--seed", "4"];
    assert_eq!(code(&lorlen(&args)), 1);
    let mut neg = args.to_vec();
    neg.extend(["--expect", "fail"]);
    assert_eq!(code(&lorlen(&neg)), 2);
}

#[test]
fn split_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "grid.json", CYLINDER_GRID);
    let run = write(dir.path(), "run.json", r#"{"sprinkle": "grid.json", "family": [1, 2, 4], "quadruples": 200}"#);
    let report = dir.path().join("report.json");
    let out = lorlen(&["split", "-c", &run, "-o", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&report)["status"], "pass");

    let curves = dir.path().join("curves.csv");
    let out = lorlen(&["plotdata", "-i", report.to_str().unwrap(), "-o", curves.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&curves).unwrap();
    assert!(text.starts_with("series,x,y\n"));
    assert!(text.contains("length_vs_window,2.0,2.0"), "{text}");
}

#[test]
fn diamond_split_exits_two_when_expected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "diamond.json", DIAMOND);
    let fail = write(dir.path(), "run.json", r#"{"sprinkle": "diamond.json", "line_at": "1", "family": [0.5, 1], "expect": "fail"}"#);
    assert_eq!(code(&lorlen(&["split", "-c", &fail])), 2);
    let pass = write(dir.path(), "run_pass.json", r#"{"sprinkle": "diamond.json", "line_at": "1", "family": [0.5, 1]}"#);
    assert_eq!(code(&lorlen(&["split", "-c", &pass])), 1);
}
