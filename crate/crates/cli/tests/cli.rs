//! End-to-end runs of the `cogbeam` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cogbeam(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogbeam"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .env_remove("COGBEAM_SEED")
        .env_remove("COGBEAM_TRIALS")
        .output()
        .expect("run cogbeam")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn emitted_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = cogbeam(&["simulate", "--preset", "fig8", "--trials", "300", "--seed", "9", "--emit-config"], d);
    assert!(o.status.success(), "{}", text(&o));
    std::fs::write(d.join("run.toml"), &o.stdout).unwrap();

    let cfg = d.join("run.toml");
    let o = cogbeam(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "a.csv"], d);
    assert!(o.status.success(), "{}", text(&o));
    let o = cogbeam(&["simulate", "--preset", "fig8", "--trials", "300", "--seed", "9", "--out", "b.csv"], d);
    assert!(o.status.success(), "{}", text(&o));
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert!(a.starts_with("mode,N,M,K,gamma_s,gamma_sp,Qp,mean_capacity,stderr,trials,seed"));
    assert_eq!(a.lines().count(), 1 + 2 * 7);
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), "[network]\ntrials = 0\n").unwrap();
    let o = cogbeam(&["simulate", "--config", "bad.toml"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("network.trials"), "{}", text(&o));

    std::fs::write(d.join("typo.toml"), "[network]\nn_user = 4\n").unwrap();
    let o = cogbeam(&["simulate", "--config", "typo.toml"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("n_user"), "{}", text(&o));
}

#[test]
fn validate_detects_a_corrupted_normalizer() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogbeam(&["validate", "--level", "fast", "--perturb-lambert", "1.01", "--out", "checks.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    let out = text(&o);
    assert!(out.contains("FAIL quantile_identity"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("quantile_identity,false")));
}

#[test]
fn espar_export_is_reproducible_and_orthonormal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["espar", "--elements", "4", "--reactances", "-30,5,60", "--grid", "180"];
    for name in ["p1.csv", "p2.csv"] {
        let o = cogbeam(&[&args[..], &["--out", name]].concat(), d);
        assert!(o.status.success(), "{}", text(&o));
    }
    let p1 = std::fs::read(d.join("p1.csv")).unwrap();
    assert_eq!(p1, std::fs::read(d.join("p2.csv")).unwrap());
    assert_eq!(
        std::fs::read(d.join("p1.report.txt")).unwrap(),
        std::fs::read(d.join("p2.report.txt")).unwrap()
    );
    let report = std::fs::read_to_string(d.join("p1.report.txt")).unwrap();
    let off: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("max_off_diagonal = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(off <= 1e-8, "{off}");
}

#[test]
fn single_element_pattern_is_omnidirectional() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogbeam(&["espar", "--elements", "1", "--grid", "64", "--out", "m1.csv"], dir.path());
    assert!(o.status.success(), "{}", text(&o));
    let mut r = csv::Reader::from_path(dir.path().join("m1.csv")).unwrap();
    let mags: Vec<f64> = r.records().map(|rec| rec.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(mags.len(), 64);
    assert!(mags.iter().all(|m| (m - mags[0]).abs() <= 1e-12 * mags[0]));
}

#[test]
fn analytic_tabulates_the_ratio_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let o = cogbeam(
        &["analytic", "--function", "ratio-cdf", "--k", "0", "--from", "1", "--to", "1", "--points", "1"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", text(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().nth(1).unwrap(), "1.0000000000000000e0,5.0000000000000000e-1");
}
