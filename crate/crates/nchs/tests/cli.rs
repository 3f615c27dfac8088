use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/inputs").join(name)
}

fn nchs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nchs"))
        .args(args)
        .env_remove("NCHS_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    v["report"].clone()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn identity_weight_factors_with_unit_u() {
    let r = report(&nchs(&["factor", "--model", "triangular:n=3", "--in", path(&fixture("identity3.json"))]));
    let u = &r["u"];
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_eq!(u[i][j][0].as_f64(), Some(want));
            assert_eq!(u[i][j][1].as_f64(), Some(0.0));
        }
    }
    for (_, v) in r["residuals"].as_object().expect("residuals") {
        assert_eq!(v.as_f64(), Some(0.0));
    }
}

#[test]
fn remark_weight_has_rank_one_support() {
    let r = report(&nchs(&["factor", "--model", "fourier:d=2,deg=4", "--in", path(&fixture("remark.json"))]));
    assert_eq!(r["s_phi_rank"], 1);
    assert!(r["residuals"]["recomposition"].as_f64().unwrap() < 1e-9);
}

#[test]
fn corrupt_json_exits_with_two() {
    let out = nchs(&["factor", "--model", "fourier:d=1,deg=2", "--in", path(&fixture("corrupt.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid JSON"), "{err}");
}

#[test]
fn indefinite_weight_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("neg.json");
    fs::write(&p, "[[[-1, 0], [0, 0]], [[0, 0], [1, 0]]]").unwrap();
    let out = nchs(&["factor", "--model", "triangular:n=2", "--in", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn conjugate_shift_is_not_invertible() {
    let r = report(&nchs(&["toeplitz", "--model", "fourier:d=1,deg=4", "--in", path(&fixture("zbar.json"))]));
    assert_eq!(r["verdict"], "NotInvertible");
    for s in r["sections"].as_array().unwrap() {
        assert_eq!(s["sigma_min"].as_f64(), Some(0.0));
    }
}

#[test]
fn certify_identity_gives_unit_alpha() {
    let r = report(&nchs(&["certify", "--model", "triangular:n=3", "--in", path(&fixture("identity3.json"))]));
    assert_eq!(r["certified"], true);
    assert!((r["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn constant_weight_has_unit_a2() {
    let r = report(&nchs(&["classical", "--in", path(&fixture("w_one.json"))]));
    assert!((r["a2"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["geometric_mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn reports_echo_config_and_input_hash() {
    let out = nchs(&["certify", "--model", "triangular:n=3", "--in", path(&fixture("identity3.json")), "--seed", "7"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["model"], "triangular:n=3");
    let bytes = fs::read(fixture("identity3.json")).unwrap();
    assert_eq!(v["inputs"][0]["sha256"], nchs::io::content_hash(&bytes));
}

fn gen_bytes(dir: &std::path::Path, seed_flag: &str, env_seed: Option<&str>) -> Vec<(String, Vec<u8>)> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nchs"));
    cmd.args([
        "gen",
        "--kind",
        "unitary-scaled",
        "--model",
        "triangular:n=4",
        "--params",
        "count=3;negatives=2",
        "--seed",
        seed_flag,
        "--out",
        dir.to_str().unwrap(),
    ]);
    cmd.env_remove("NCHS_SEED");
    if let Some(s) = env_seed {
        cmd.env("NCHS_SEED", s);
    }
    assert!(cmd.status().unwrap().success());
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let name = e.file_name().to_string_lossy().into_owned();
            let body = if name == "manifest.json" { Vec::new() } else { fs::read(e.path()).unwrap() };
            (name, body)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn gen_is_deterministic_and_env_seed_wins() {
    let t = tempfile::tempdir().unwrap();
    let a = gen_bytes(&t.path().join("a"), "11", None);
    let b = gen_bytes(&t.path().join("b"), "11", None);
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    let c = gen_bytes(&t.path().join("c"), "12", None);
    assert_ne!(a, c);
    let d = gen_bytes(&t.path().join("d"), "12", Some("11"));
    assert_eq!(a, d);
}

#[test]
fn generated_zero_scale_unitary_is_identity() {
    let out = nchs(&["gen", "--kind", "unitary-scaled", "--model", "triangular:n=3", "--params", "count=2"]);
    let v = report(&out);
    let u = &v[0]["inputs"]["u"];
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((u[i][j][0].as_f64().unwrap() - want).abs() < 1e-15);
            assert!(u[i][j][1].as_f64().unwrap().abs() < 1e-15);
        }
    }
}

#[test]
fn verify_routes_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = nchs(&["verify", "--suite", "szego", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s: Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let suites = s["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "szego");
    assert_eq!(s["passed"], true);
    for f in ["margins.csv", "margins_histogram.csv", "timing.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn tighter_tolerance_still_passes_equivalence() {
    let out = nchs(&["verify", "--suite", "equivalence", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = nchs(&["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
