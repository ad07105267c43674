use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SQUARE: &str = r#"{"kind":"polygon","vertices":[[0,0],[1,0],[1,1],[0,1]]}"#;
const CW3: &str = r#"{"kind":"support2d","a0":1,"coeffs":[[0,0],[0,0],[0.05,0]]}"#;
const NON_CONVEX: &str = r#"{"kind":"polygon","vertices":[[0,0],[1,0],[0.5,0.1],[1,1],[0,1]]}"#;

fn covario(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covario"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn body_validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(&dir, "square.json", SQUARE);
    let nc = write(&dir, "nc.json", NON_CONVEX);
    let bad = write(&dir, "bad.json", "{\"kind\":\"polygon\",\n");
    let unknown = write(
        &dir,
        "unk.json",
        r#"{"kind":"disk","center":[0,0],"radius":1,"extra":2}"#,
    );

    assert_eq!(covario(&["body-validate", "--body", s(&square)]).status.code(), Some(0));
    assert_eq!(covario(&["body-validate", "--body", s(&nc)]).status.code(), Some(1));

    let out = covario(&["body-validate", "--body", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line 2"), "{err}");

    let out = covario(&["body-validate", "--body", s(&unknown)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extra"));

    let missing = dir.path().join("missing.json");
    assert_eq!(
        covario(&["body-validate", "--body", s(&missing)]).status.code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(covario(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(covario(&["covariogram"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let nc = write(&dir, "nc.json", NON_CONVEX);
    assert_eq!(covario(&["covariogram", "--body", s(&nc)]).status.code(), Some(2));
    let square = write(&dir, "square.json", SQUARE);
    assert_eq!(
        covario(&["covariogram", "--body", s(&square), "--grid", "41"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(covario(&["verify", "all", "--tolerance", "1"]).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_covario"))
        .args(["verify", "matrix-identities", "--draws", "5"])
        .env("COVARIO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_reports_carry_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(&dir, "square.json", SQUARE);
    let out = covario(&["--json", "body-validate", "--body", s(&square)]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "body-validate");

    let out = covario(&["verify", "matrix-identities", "--draws", "20", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
}

#[test]
fn square_covariogram_grid() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(&dir, "square.json", SQUARE);
    let csv = dir.path().join("g.csv");
    let args = [
        "covariogram",
        "--body",
        s(&square),
        "--grid",
        "41x41",
        "--extent",
        "1,1",
        "--out",
        s(&csv),
    ];
    assert!(covario(&args).status.success());
    let first = fs::read(&csv).unwrap();

    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [f[0], f[1], f[2]]
        })
        .collect();
    assert_eq!(rows.len(), 41 * 41);
    for [x, y, g] in &rows {
        let exact = ((1.0 - x.abs()) * (1.0 - y.abs())).max(0.0);
        assert!((g - exact).abs() < 1e-12, "g({x}, {y}) = {g}");
    }
    let centre = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    assert_eq!(centre[2], 1.0);

    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(sidecar["schema_version"], 1);
    assert_eq!(sidecar["nx"], 41);
    assert_eq!(sidecar["method"], "exact-clip");

    assert!(covario(&args).status.success());
    assert_eq!(fs::read(&csv).unwrap(), first, "reruns are byte-identical");
}

#[test]
fn crosscov_family_pairs_agree() {
    let a = covario(&["crosscov", "--family", "1", "--grid", "21x21"]);
    let b = covario(&["crosscov", "--family", "2", "--grid", "21x21", "--extent", "1,1"]);
    assert!(a.status.success() && b.status.success());
    let out = covario(&["verify", "counterexample", "--family", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn zeros_of_constant_width_body() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(&dir, "cw3.json", CW3);
    let csv = dir.path().join("z.csv");
    let out = covario(&[
        "zeros",
        "--body",
        s(&body),
        "--u",
        "0",
        "--m",
        "1..40",
        "--out",
        s(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let validated = header.iter().position(|h| *h == "validated").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.split(',').nth(validated) == Some("true")));
}

#[test]
fn radon_integrates_to_area() {
    let dir = tempfile::tempdir().unwrap();
    let square = write(&dir, "square.json", SQUARE);
    let out = covario(&["--json", "radon", "--body", s(&square), "--u", "0.3"]);
    assert!(out.status.success());
    let v = json(&out);
    let integral = v["integral"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 1e-12, "{v}");
}
