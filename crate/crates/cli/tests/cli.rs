use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bimetric3"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MINK: &str = r#"[["1","0","0"],["0","-1","0"],["0","0","-1"]]"#;

fn pair_json(g: &str, gc: &str) -> String {
    format!(r#"{{"g": {g}, "g_check": {gc}}}"#)
}

#[test]
fn classify_t1_reports_d3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t1.json",
        &pair_json(MINK, r#"[["2","0","0"],["0","1","0"],["0","0","3"]]"#),
    );
    let o = run(&["classify", "--input", s(&p)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "T1_THREE_REAL_DISTINCT");
    assert_eq!(v["invariants"]["D3"], "900");
    assert!(v.get("transform").is_none());
}

#[test]
fn classify_t7_sigma2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "t7.json", &pair_json(MINK, MINK));
    let o = run(&["classify", "-i", s(&p)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "T7_TRIPLE_SCALAR");
    assert_eq!(v["invariants"]["sigma2"], 0);
}

#[test]
fn wrong_signature_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let g = r#"[["1","0","0"],["0","1","0"],["0","0","-1"]]"#;
    let p = write(dir.path(), "bad.json", &pair_json(g, g));
    let o = run(&["classify", "-i", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("signature (2,1,0), expected (1,2,0)"));
}

#[test]
fn malformed_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"g\": 3}");
    assert_eq!(run(&["classify", "-i", s(&p)]).status.code(), Some(1));
    let mixed = write(
        dir.path(),
        "mixed.json",
        &pair_json(r#"[["1",0,0],[0,-1,0],[0,0,-1]]"#, MINK),
    );
    let o = run(&["classify", "-i", s(&mixed)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mixes"));
    assert_eq!(run(&["classify", "--bogus"]).status.code(), Some(1));
}

#[test]
fn canonical_input_gives_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "t1.json",
        &pair_json(MINK, r#"[["2","0","0"],["0","1","0"],["0","0","3"]]"#),
    );
    let o = run(&["canonicalize", "-i", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["residual"], 0.0);
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(v["transform"][i][j], if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn scrambled_t10_and_tight_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t10.json");
    let o = run(&["generate", "--class", "T10", "--seed", "5", "-o", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["canonicalize", "-i", s(&p)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-9);

    // A bound-9 scramble carries enough rounding that 1e-15 is out of reach.
    let mut failed = false;
    for seed in 0..20 {
        let q = dir.path().join(format!("ill{seed}.json"));
        run(&[
            "generate",
            "--class",
            "T10",
            "--seed",
            &seed.to_string(),
            "--bound",
            "9",
            "-o",
            s(&q),
        ]);
        let o = run(&["canonicalize", "-i", s(&q), "--tol", "1e-15"]);
        if o.status.code() == Some(2) {
            assert!(stderr(&o).contains("exceeds tolerance"), "{}", stderr(&o));
            failed = true;
            break;
        }
    }
    assert!(failed);
}

#[test]
fn generate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    let o = run(&[
        "generate",
        "--class",
        "T1",
        "--params",
        "a=2,b=1,c=3",
        "--seed",
        "7",
        "-o",
        s(&p),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("g.truth.json").exists());
    let o = run(&["classify", "-i", s(&p)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "T1_THREE_REAL_DISTINCT");

    let o = run(&["generate", "--class", "T1", "--params", "a=2,b=1,c=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("requires b≠c"));

    let o = run(&[
        "generate", "--class", "T7", "--params", "a=1", "--bound", "1",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["g"], v["g_check"]);
}

#[test]
fn verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    run(&["generate", "--class", "T5", "--seed", "2", "-o", s(&p)]);
    let r = dir.path().join("r.json");
    assert_eq!(
        run(&["canonicalize", "-i", s(&p), "-o", s(&r)])
            .status
            .code(),
        Some(0)
    );
    let o = run(&["verify", s(&p), s(&r)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let mut v: Value = serde_json::from_str(&fs::read_to_string(&r).unwrap()).unwrap();
    let t00 = v["transform"][0][0].as_f64().unwrap();
    v["transform"][0][0] = (t00 + 0.5).into();
    let bad = write(dir.path(), "bad_t.json", &v.to_string());
    let o = run(&["verify", s(&p), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL residual: residual"));

    let mut v: Value = serde_json::from_str(&fs::read_to_string(&r).unwrap()).unwrap();
    v["class"] = "T6_SPACELIKE_DOUBLE_SMINUS".into();
    let bad = write(dir.path(), "bad_c.json", &v.to_string());
    let o = run(&["verify", s(&p), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("condition mismatch"));
}

#[test]
fn mode_inference_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    run(&[
        "generate",
        "--class",
        "T2",
        "--seed",
        "4",
        "--mode",
        "float",
        "-o",
        s(&p),
    ]);
    let o = run(&["classify", "-i", s(&p)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "FLOAT");
    assert_eq!(v["class"], "T2_TIMELIKE_DOUBLE");

    let o = run(&["classify", "-i", s(&p), "--mode", "exact"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "EXACT");
    assert!(v["invariants"]["D3"].is_string());
}

#[test]
fn output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    run(&["generate", "--class", "T3", "--seed", "9", "-o", s(&p)]);
    let a = run(&["canonicalize", "-i", s(&p)]);
    let b = run(&["canonicalize", "-i", s(&p)]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn text_format() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "t7.json", &pair_json(MINK, MINK));
    let o = run(&["canonicalize", "-i", s(&p), "--format", "text"]);
    let out = stdout(&o);
    assert!(out.starts_with("class         T7_TRIPLE_SCALAR\n"));
    assert!(out.contains("sigma2        0\n"));
}

#[test]
fn batch_directory() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in");
    fs::create_dir(&inputs).unwrap();
    for (i, c) in ["T1", "T4", "T8", "T9"].iter().enumerate() {
        let p = inputs.join(format!("{c}.json"));
        run(&[
            "generate",
            "--class",
            c,
            "--seed",
            &i.to_string(),
            "-o",
            s(&p),
        ]);
    }
    let out = dir.path().join("out");
    let o = run(&[
        "canonicalize",
        "-i",
        s(&inputs),
        "-o",
        s(&out),
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for c in ["T1", "T4", "T8", "T9"] {
        let r = out.join(format!("{c}.result.json"));
        let v: Value = serde_json::from_str(&fs::read_to_string(r).unwrap()).unwrap();
        assert!(v["class"].as_str().unwrap().starts_with(c));
    }
}
