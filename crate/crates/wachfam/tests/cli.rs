use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: [&str; 6] = ["--cap-p", "8", "--cap-pi", "20", "--cap-x", "3"];

fn wachfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wachfam"))
        .args(args)
        .env_remove("WACHFAM_P")
        .env_remove("WACHFAM_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build(dir: &Path, p: &str, k: &str, name: &str) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec!["--p", p];
    args.extend(SMALL);
    args.extend(["build", "--k", k, "--out", out.to_str().unwrap()]);
    let o = wachfam(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn lambda_text_and_json_agree() {
    let mut args = vec![
        "--p", "3", "--cap-p", "10", "--cap-pi", "40", "--cap-x", "4",
    ];
    args.push("lambda");
    let text = wachfam(&args);
    assert_eq!(text.status.code(), Some(0));
    let mut jargs = args.clone();
    jargs.splice(0..0, ["--format", "json"]);
    let json = wachfam(&jargs);
    assert_eq!(json.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    let text = stdout(&text);
    for key in [
        "p",
        "cap_p",
        "cap_pi",
        "factors_used",
        "constant_terms",
        "ring_r",
        "frobenius_relations",
    ] {
        let line = format!("{key}: {}", v[key]);
        assert!(text.contains(&line), "missing {line:?}");
    }
    assert_eq!(v["frobenius_relations"], Value::Bool(true));
}

#[test]
fn rejects_p_two_and_short_caps() {
    let o = wachfam(&["--p", "2", "lambda"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p = 2"));
    let o = wachfam(&["--p", "3", "--cap-pi", "3", "build", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wachfam(&["lambda"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wachfam(&[
        "--p",
        "3",
        "specialize",
        "/nonexistent/file.json",
        "--alpha",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_is_deterministic_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let a = build(dir.path(), "3", "4", "a.json");
    let b = build(dir.path(), "3", "4", "b.json");
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["m"], 1);
    assert_eq!(
        v["z"]["pi_coeffs"][0][0]
            .as_str()
            .unwrap()
            .split(' ')
            .next(),
        Some("1*3^1")
    );

    let o = wachfam(&["verify", a.to_str().unwrap(), "--samples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = wachfam(&["verify", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("alpha"));
}

#[test]
fn flipped_coefficient_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let file = build(dir.path(), "5", "4", "f.json");
    let mut v: Value = serde_json::from_slice(&std::fs::read(&file).unwrap()).unwrap();
    let g = v["G"].as_object_mut().unwrap().values_mut().next().unwrap();
    let slot = &mut g["g"][0][1]["pi_coeffs"][0][3];
    assert_ne!(slot.as_str(), Some("1*5^0 (mod 5^12)"));
    *slot = Value::String("1*5^0 (mod 5^12)".into());
    std::fs::write(&file, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = wachfam(&["--format", "json", "verify", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = report["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["claim"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"lift.commutation"), "{failed:?}");
}

#[test]
fn malformed_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = build(dir.path(), "3", "2", "f.json");
    let text = std::fs::read_to_string(&file)
        .unwrap()
        .replacen("(mod 3^", "(mod 5^", 1);
    std::fs::write(&file, text).unwrap();
    let o = wachfam(&["verify", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn specialize_fil_and_reduce() {
    let dir = tempfile::tempdir().unwrap();
    let file = build(dir.path(), "3", "4", "f.json");
    let f = file.to_str().unwrap();
    let o = wachfam(&["--format", "json", "specialize", f, "--alpha", "1*3^1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["jumps"], serde_json::json!([0, 3]));
    assert!(v["a_p"].as_str().unwrap().starts_with("1*3^2"));

    let o = wachfam(&["fil", f, "--alpha", "0"]);
    let text = stdout(&o);
    assert!(text.contains("Fil^3   = (n1, pi^3 n2)"), "{text}");
    assert!(text.contains("Fil^4   = (pi n1, pi^4 n2)"));

    let o = wachfam(&["reduce", f, "--alpha", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ind(omega2^(3))"));

    let o = wachfam(&["specialize", f, "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_table() {
    let mut args = vec!["--p", "3"];
    args.extend(SMALL);
    args.extend(["--format", "json", "zscan", "--k-max", "8"]);
    let o = wachfam(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let row = |k: u64| rows.iter().find(|r| r["k"] == k).unwrap();
    assert_eq!(row(4)["minimal_m"], 0);
    assert_eq!(row(2)["reduction_bound"], 0);
    assert_eq!(row(2)["minimal_m"], 0);
    for r in rows {
        assert!(r["minimal_m"].as_u64() <= r["standard_m"].as_u64());
    }
}

#[test]
fn cache_directory_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = cache.to_str().unwrap();
    let mut args = vec!["--p", "5", "--cache-dir", c];
    args.extend(SMALL);
    args.push("lambda");
    let first = wachfam(&args);
    assert_eq!(first.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(files.len(), 1);
    let second = wachfam(&args);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn env_overrides_flags() {
    let o = Command::new(env!("CARGO_BIN_EXE_wachfam"))
        .args(["lambda"])
        .env("WACHFAM_P", "7")
        .env("WACHFAM_CAP_P", "6")
        .env("WACHFAM_CAP_PI", "16")
        .env("WACHFAM_FORMAT", "json")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["p"], 7);
    assert_eq!(v["cap_pi"], 16);
}
