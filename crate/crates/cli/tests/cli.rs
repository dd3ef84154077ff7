use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn superl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superl")).args(args).output().expect("spawn superl")
}

fn ok(args: &[&str]) -> String {
    let o = superl(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    superl(args).status.code().unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const FAMILY: &str = r#"{
  "bubbles": [{"kind": "liouville", "lambda0": 2.0, "growth": 2.0}],
  "domain": {"kind": "disk", "center": {"x": 0.0, "y": 0.0}, "radius": 1.0},
  "h": 0.015625,
  "n_range": [0, 4]
}"#;

fn family_file(dir: &Path) -> String {
    let p = dir.join("family.json");
    fs::write(&p, FAMILY).unwrap();
    p.display().to_string()
}

#[test]
fn verify_exact_reports_small_residuals() {
    let out: Value = serde_json::from_str(&ok(&["verify-exact", "--lambda", "2", "--h", "0.0078125"])).unwrap();
    let res = out["residual_inf"].as_f64().unwrap();
    assert!(res < 0.05, "{out}");
    let mass = out["mass_B1"].as_f64().unwrap();
    assert!((mass - 16.0 * std::f64::consts::PI / 5.0).abs() < 1e-2, "{mass}");
}

#[test]
fn pohozaev_of_the_default_cone() {
    let csv = ok(&["pohozaev", "--h", "0.0078125"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("radius,C"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    // the β = 1/2 cone carries C = π/4 at every radius
    for c in rows {
        assert!((c - std::f64::consts::FRAC_PI_4).abs() < 5e-3, "{c}");
    }
}

#[test]
fn blowup_writes_audit_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let fam = family_file(dir.path());
    let out = dir.path().join("run");
    let stdout = ok(&["blowup", "--family", &fam, "--deltas", "1,0.5", "--out", out.to_str().unwrap(), "--plot"]);
    let csv = fs::read_to_string(out.join("audit.csv")).unwrap();
    assert_eq!(csv, stdout);
    assert_eq!(csv.lines().next(), Some("n,mass,neck_sup,defect_psi4,defect_e2u,label"));
    assert_eq!(csv.lines().count(), 6);
    for f in ["audit.json", "quantization.json", "mass.svg", "defects.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let svg = fs::read_to_string(out.join("mass.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<svg").count(), 1);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let fam = family_file(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        ok(&["report", "--family", &fam, "--out", d.to_str().unwrap()]);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn manifest_records_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# conical cone\ncase = conical\nbeta = 0.25\nh = 0.03125\n").unwrap();
    let out = dir.path().join("o");
    ok(&["pohozaev", "--config", cfg.to_str().unwrap(), "--h", "0.015625", "--out", out.to_str().unwrap()]);
    let m = json_file(&out.join("manifest.json"));
    assert_eq!(m["tool"], "superl");
    assert_eq!(m["subcommand"], "pohozaev");
    assert_eq!(m["config"]["beta"], "0.25");
    // command-line flags override the file
    assert_eq!(m["config"]["h"], "0.015625");
    let sha = m["config_sha256"].as_str().unwrap();
    assert!(sha.len() == 64 && sha.chars().all(|c| c.is_ascii_hexdigit()));
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["pohozaev.csv"]);
    assert!(m["grid"].is_object());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["verify-exact", "--no-such-flag"]), 2);
    assert_eq!(code(&["blowup"]), 2);
    assert_eq!(code(&["verify-exact", "--lambda", "-1"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "lambda = 2\nlamda = 3\n").unwrap();
    assert_eq!(code(&["verify-exact", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(code(&["solve", "--case", "constant", "--bc", "5", "--h", "0.0625"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn classify_canned_families() {
    for (name, want) in [("a", "a"), ("b", "b"), ("c", "c")] {
        let v: Value = serde_json::from_str(&ok(&["classify", "--canned", name])).unwrap();
        assert_eq!(v["brezis_merle"]["case"], want, "{v}");
    }
}

#[test]
fn solve_then_measure_the_stored_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    ok(&["solve", "--case", "constant", "--bc", "-5", "--h", "0.03125", "--out", out.to_str().unwrap()]);
    let report = json_file(&out.join("solve.json"));
    assert_eq!(report["converged"], true, "{report}");
    let state = out.join("solution.json");
    let csv = ok(&["pohozaev", "--input", state.to_str().unwrap(), "--radii", "0.5"]);
    let c: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // a regular solution carries no Pohozaev constant
    assert!(c.abs() < 1e-6, "{c}");
}
