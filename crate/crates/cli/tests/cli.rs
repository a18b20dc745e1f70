//! End-to-end tests of the binary's subcommands and exit codes.

use std::process::{Command, Output};

fn resnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resnorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn scan_writes_a_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let out = resnorm(&[
        "scan",
        "--resolution",
        "3",
        "--half-width",
        "8",
        "--restarts",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,norm,trunc_bound"));
    assert_eq!(lines.count(), 9, "resolution 3 scans 9 points");
}

#[test]
fn flatness_reports_the_variation() {
    let out = resnorm(&[
        "flatness",
        "--resolution",
        "3",
        "--half-width",
        "8",
        "--restarts",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("relative variation"));
    assert!(text.contains("-> flat"), "star scan should be flat: {text}");
}

#[test]
fn euclidean_scan_is_reported_not_flat() {
    let out = resnorm(&[
        "flatness",
        "--norm",
        "l2",
        "--resolution",
        "3",
        "--half-width",
        "8",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("-> not flat"));
}

#[test]
fn opnorm_prints_a_certified_estimate() {
    let out = resnorm(&[
        "opnorm",
        "--lambda-re",
        "0.1",
        "--lambda-im",
        "0.05",
        "--restarts",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("resolvent norm at"));
    assert!(text.contains("1.000000000000"), "flat level 1: {text}");
    assert!(text.contains("certified lower bound true"));
}

#[test]
fn dual_psi_emits_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dual.csv");
    let out = resnorm(&[
        "dual-psi",
        "--psi",
        "power:2",
        "--grid-n",
        "256",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,psi"));
    // The self-dual shape keeps its midpoint value 1/sqrt(2).
    let mid: f64 = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts = l.split(',');
            let t: f64 = parts.next().unwrap().parse().unwrap();
            let v: f64 = parts.next().unwrap().parse().unwrap();
            (t, v)
        })
        .min_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs()))
        .map(|(_, v)| v)
        .unwrap();
    assert!((mid - 0.7071067811865475).abs() < 1e-4, "midpoint {mid}");
}

#[test]
fn convexity_finds_and_misses_as_expected() {
    let out = resnorm(&["convexity", "--norm", "star", "--trials", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("flat disc found"));

    let out = resnorm(&["convexity", "--norm", "l2", "--trials", "30"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("no flat disc found"));
}

#[test]
fn kallman_rota_stays_under_the_bound() {
    let out = resnorm(&[
        "kallman-rota",
        "--dim",
        "3",
        "--generators",
        "4",
        "--trials",
        "100",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("against the bound 4: holds"));
}

#[test]
fn verify_kind_a_bundle_passes() {
    let out = resnorm(&[
        "verify",
        "kind-a",
        "--resolution",
        "3",
        "--half-width",
        "12",
        "--restarts",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("flat at 1.000 over |λ| ≤ 0.25"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_kind_b_bundle_passes() {
    let out = resnorm(&[
        "verify",
        "kind-b",
        "--resolution",
        "3",
        "--half-width",
        "12",
        "--restarts",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("flat at 4.000 over |λ| ≤ 0.082333"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = resnorm(&["scan", "--norm", "banana"]);
    assert_eq!(out.status.code(), Some(2));

    let out = resnorm(&["opnorm", "--lambda-re", "0.5"]);
    assert_eq!(out.status.code(), Some(2), "outside the validated disc");
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the validated disc"));
}
