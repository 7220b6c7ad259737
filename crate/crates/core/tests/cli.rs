use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quartic_cert::gen::CHOI_LAM;

const NEGATIVE: &str = "x0^4 - 3*x0^2*x1^2 + x1^4 + x2^4 + x3^4";

fn qcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcert"))
        .args(args)
        .env_remove("QC_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cl.json");
    let o = qcert(&["certify", "--poly", CHOI_LAM, "--out", path(&cert)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("report.json");
    let o = qcert(&["verify", "--poly", CHOI_LAM, "--cert", path(&cert), "--report", path(&report)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("certificate verified"));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
}

#[test]
fn same_seed_same_bytes() {
    let a = qcert(&["certify", "--poly", CHOI_LAM, "--seed", "5"]);
    let b = qcert(&["certify", "--poly", CHOI_LAM, "--seed", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    assert_eq!(code(&qcert(&["certify", "--poly", CHOI_LAM, "--out", path(&cert)])), 0);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let c = v["p"]["coeffs"][0].as_f64().unwrap();
    v["p"]["coeffs"][0] = serde_json::json!(c + 1e-2 * c.abs().max(1.0));
    fs::write(&cert, v.to_string()).unwrap();
    let o = qcert(&["verify", "--poly", CHOI_LAM, "--cert", path(&cert)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("certificate rejected"));
}

#[test]
fn negative_input_is_rejected_with_witness() {
    let o = qcert(&["certify", "--poly", NEGATIVE]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).starts_with("rejected: f("));
}

#[test]
fn input_errors() {
    assert_eq!(code(&qcert(&["certify", "--poly", "x0^4 + x1^3"])), 4);
    assert_eq!(code(&qcert(&["certify", "--poly", "x0^4 +"])), 4);
    assert_eq!(code(&qcert(&["certify", "--input", "/nonexistent/poly.txt"])), 4);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{").unwrap();
    assert_eq!(code(&qcert(&["verify", "--poly", CHOI_LAM, "--cert", path(&bad)])), 4);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&qcert(&["certify"])), 64);
    assert_eq!(code(&qcert(&["certify", "--method", "magic", "--poly", CHOI_LAM])), 64);
    assert_eq!(code(&qcert(&["frobnicate"])), 64);
    assert_eq!(code(&qcert(&["--help"])), 0);
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>, flag: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qcert"));
        c.args(["gen", "--kind", "soseps", "--count", "2"]).args(flag);
        match seed {
            Some(s) => c.env("QC_SEED", s),
            None => c.env_remove("QC_SEED"),
        };
        c.output().unwrap()
    };
    let env7 = run(Some("7"), &[]);
    let flag7 = run(None, &["--seed", "7"]);
    let flag_wins = run(Some("9"), &["--seed", "7"]);
    let default = run(None, &[]);
    assert_eq!(code(&env7), 0);
    assert_eq!(env7.stdout, flag7.stdout);
    assert_eq!(flag_wins.stdout, flag7.stdout);
    assert_ne!(default.stdout, flag7.stdout);
    assert_eq!(code(&run(Some("banana"), &[])), 64);
}

#[test]
fn batch_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let out = dir.path().join("out");
    fs::create_dir(&input).unwrap();
    fs::write(input.join("cl.txt"), format!("# Choi-Lam\n{CHOI_LAM}\n")).unwrap();
    fs::write(input.join("neg.txt"), NEGATIVE).unwrap();
    let o = qcert(&["gen", "--kind", "sos", "--count", "2", "--out-dir", path(&input)]);
    assert_eq!(code(&o), 0);
    let o = qcert(&["certify", "--batch", path(&input), "--out", path(&out)]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    for stem in ["cl", "0000", "0001"] {
        let text = fs::read_to_string(out.join(format!("{stem}.cert.json"))).unwrap();
        let poly = if stem == "cl" { input.join("cl.txt") } else { input.join(format!("{stem}.txt")) };
        let cert = out.join(format!("{stem}.cert.json"));
        assert!(text.contains("quartic-cert"));
        assert_eq!(code(&qcert(&["verify", "--input", path(&poly), "--cert", path(&cert)])), 0);
    }
    assert!(!out.join("neg.cert.json").exists());
}

#[test]
fn check_sos_and_min_sphere() {
    let o = qcert(&["check-sos", "--poly", CHOI_LAM]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "NotSos");
    let o = qcert(&["check-sos", "--poly", "x0^4 + x1^4 + x2^4 + x3^4"]);
    assert_eq!(stdout(&o).trim(), "IsSos");
    let o = qcert(&["min-sphere", "--poly", NEGATIVE]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_f64().unwrap() < -0.1);
}
