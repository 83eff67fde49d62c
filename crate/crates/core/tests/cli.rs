use std::path::Path;
use std::process::{Command, Output};

fn besov(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov"))
        .args(args)
        .arg("--config")
        .arg(config)
        .env("BESOV_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn invalid_exponent_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"p": 1.0, "s": 0.5, "function": {"kind": "constant", "c": 1.0}}"#);
    let out = besov(&["besov-norm"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p > 1 required"));
}

#[test]
fn order_below_smoothness_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"p": 2, "s": 1.5, "k": 1, "function": {"kind": "constant", "c": 1.0}}"#);
    let out = besov(&["besov-norm"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k > s required"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", "{\n  \"p\": 2,\n  \"s\": oops\n}");
    let out = besov(&["besov-norm"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn measure_errors_surface_before_computation() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "mu.csv", "re_z1,im_z1,mass\n0.5,0.0,1.0\n0.2,0.1,zero\n");
    let cfg = write(dir.path(), "c.json", r#"{"preset": "power-half-n1", "measure": "mu.csv"}"#);
    let out = besov(&["carleson-test"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 3"), "{err}");
}

#[test]
fn csv_format_has_field_value_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"p": 2, "s": 0.25, "k": 1, "samples": 2000, "function": {"kind": "constant", "c": 1.0}}"#,
    );
    let out = besov(&["besov-norm", "--format", "csv"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("field,value"));
    assert!(text.contains("command,besov-norm"));
    assert!(text.contains("result.k,1"));
}

#[test]
fn seed_override_changes_only_the_seeded_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"p": 2, "s": 0.3, "samples": 3000, "weight": {"family": "power", "alpha": 0.5}, "function": {"kind": "kernel", "pole": [[0.5, 0.0]], "b": 2.0}}"#,
    );
    let body = |args: &[&str]| {
        let out = besov(args, &cfg);
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["body"].clone()
    };
    let a = body(&["besov-norm", "--seed", "7"]);
    let b = body(&["besov-norm", "--seed", "8"]);
    assert_eq!(a["config"]["seed"], 7);
    assert_ne!(a["result"]["norm"]["value"], b["result"]["norm"]["value"]);
    assert_eq!(a["result"]["tilt"], b["result"]["tilt"]);
}
