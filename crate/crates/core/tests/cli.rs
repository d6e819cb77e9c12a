use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use helidec::series::{parse_series, SPECTRA_HEADER};

fn helidec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helidec")).args(args).output().expect("spawn helidec")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.cfg");
    let text = format!(
        "# small forced run\ngrid_n = 8\nnu = 0.05\ndt = 0.005\nt_end = 0.1\nsample_every = 4\nseed = 3\n\
         force_band_lo = 1\nforce_band_hi = 2\nforce_amp = 0.5\nout_dir = {}\n{extra}",
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn verify_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = helidec(&["verify", &cfg]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().count() >= 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn run_then_spectra_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = helidec(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let series = fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    let records = parse_series(&series).unwrap();
    assert_eq!(records.first().unwrap().t, 0.0);
    assert!((records.last().unwrap().t - 0.1).abs() < 1e-12);
    assert!(records.iter().all(|r| r.budget_residual_h.abs() <= 1e-12 && r.bound_lhs <= r.bound_rhs));

    let ck = dir.path().join("out/final.dnsh");
    let out = helidec(&["spectra", ck.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let closure: Vec<f64> = stdout
        .split_whitespace()
        .filter_map(|w| w.strip_prefix("Pi_").and_then(|w| w.split_once('=')).and_then(|(_, v)| v.parse().ok()))
        .collect();
    assert_eq!(closure.len(), 2, "{stdout}");
    assert!(closure.iter().all(|&c| c <= 1e-12), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("out/spectra.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(SPECTRA_HEADER));
}

#[test]
fn probe_writes_one_row_per_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = helidec(&["probe", &cfg, "--eps", "1e-4,5e-5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/probe.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn errors_are_reported_with_their_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bogus = 1\n");
    let out = helidec(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind=UnknownKey"));

    let junk = dir.path().join("junk.dnsh");
    fs::write(&junk, b"NOPE").unwrap();
    let out = helidec(&["spectra", junk.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind=BadMagic"));
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let out = helidec(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("usage"));
}
