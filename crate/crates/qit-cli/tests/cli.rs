use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use qit_cli::run;
use qit_core::io::state_to_string;
use qit_core::linalg::{diag, ket, proj, real_matrix, CMat, Sampler};
use qit_core::states::{cq_state, DensityOperator};

fn write_state(dir: &TempDir, name: &str, rho: &DensityOperator) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, state_to_string(rho)).unwrap();
    path
}

fn single(dir: &TempDir, name: &str, m: CMat) -> PathBuf {
    write_state(dir, name, &DensityOperator::single(m).unwrap())
}

fn qit(args: &[&str]) -> qit_cli::Outcome {
    run(std::iter::once("qit").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn lines(stdout: &str) -> Vec<Value> {
    stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

#[test]
fn identical_states_have_zero_divergence() {
    let dir = TempDir::new().unwrap();
    let mut s = Sampler::new(1);
    let m = s.full_density(3).unwrap();
    let r = single(&dir, "r.json", m.clone());
    let t = single(&dir, "s.json", m);
    let out = qit(&["eval", "--quantity", "dmin", "--alpha", "0.5", "--rho", p(&r), "--sigma", p(&t)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows = lines(&out.stdout);
    assert_eq!(rows.len(), 2);
    assert!(num(&rows[0], "value").abs() < 1e-12);
    assert_eq!(rows[0]["base"], "2");
    assert_eq!(rows[0]["witness_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(rows[1]["status"], "ok");
}

#[test]
fn renyi_orgy_csv() {
    let out = qit(&["fig", "--name", "renyi-orgy", "--out", "csv"]);
    assert_eq!(out.code, 0);
    let mut it = out.stdout.lines();
    let header: Vec<&str> = it.next().unwrap().split(',').collect();
    assert_eq!(&header[..6], ["command", "figure", "alpha", "minimal", "petz", "maximal"]);
    let rows: Vec<Vec<String>> = it.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 60);
    for r in &rows {
        let v: Vec<f64> = r[2..6].iter().map(|x| x.parse().unwrap()).collect();
        // 12 significant digits, plain decimal point
        let digits = r[3].chars().filter(char::is_ascii_digit).collect::<String>();
        assert_eq!(digits.trim_start_matches('0').len(), 12, "{}", r[3]);
        assert!(v[1] <= v[2] + 1e-9, "minimal above petz at {}", v[0]);
        if v[0] <= 2.0 {
            assert!(v[2] <= v[3] + 1e-9, "petz above maximal at {}", v[0]);
        }
    }
    // the summary record goes to standard error in CSV mode
    assert!(out.stderr.contains("\"umegaki\""));
}

#[test]
fn tangent_and_aep_figures() {
    let out = qit(&["fig", "--name", "tangent"]);
    let rows = lines(&out.stdout);
    let at_one = rows.iter().find(|r| (num(r, "alpha") - 1.0).abs() < 1e-12).unwrap();
    assert!((num(at_one, "minimal") - num(at_one, "taylor")).abs() < 1e-9);
    assert!((num(at_one, "petz") - num(at_one, "taylor")).abs() < 1e-9);

    let out = qit(&["fig", "--name", "aep-bernoulli"]);
    let rows = lines(&out.stdout);
    let summary = rows.last().unwrap();
    assert!((num(summary, "h") - 0.721928).abs() < 1e-6);
    assert!((num(summary, "h_min") - 0.321928).abs() < 1e-6);
    let for_n = |n: u64| rows.iter().filter(move |r| r["n"].as_u64() == Some(n));
    for n in [50, 100, 500, 2500] {
        let last = for_n(n).last().unwrap();
        assert!((num(last, "cumulative") - 1.0).abs() < 1e-9);
        let rates: Vec<f64> = for_n(n).map(|r| num(r, "surprisal_rate")).collect();
        assert!(rates.windows(2).all(|w| w[1] <= w[0]));
        assert!((rates.last().unwrap() - 0.321928).abs() < 1e-6);
    }
}

#[test]
fn duality_suite_example() {
    let out = qit(&["verify", "--suite", "duality", "--samples", "100", "--seed", "1", "--tol", "1e-6"]);
    assert_eq!(out.code, 0);
    let rows = lines(&out.stdout);
    assert_eq!(rows.len(), 101);
    let summary = rows.last().unwrap();
    assert!(num(summary, "max_residual") < 1e-6);
    assert_eq!(summary["passed"], true);
}

#[test]
fn suites_pass_and_fail_by_tolerance() {
    for suite in ["dpi", "ns", "sdp", "ur"] {
        let out = qit(&["verify", "--suite", suite, "--samples", "12", "--seed", "3", "--tol", "1e-6"]);
        assert_eq!(out.code, 0, "{suite}: {}", out.stdout.lines().last().unwrap());
    }
    let out = qit(&["verify", "--suite", "ns", "--samples", "12", "--tol", "1e-300"]);
    assert_eq!(out.code, 1);
    assert_eq!(lines(&out.stdout).last().unwrap()["status"], "failed");
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--suite", "dpi", "--samples", "20", "--seed", "9"];
    let a = qit(&args);
    let b = qit(&args);
    assert_eq!(a, b);
    let c = qit(&["verify", "--suite", "dpi", "--samples", "20", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validation_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let r = single(&dir, "r.json", diag(&[0.5, 0.5]));
    let big = single(&dir, "big.json", diag(&[0.25; 4]));
    let cases: Vec<Vec<&str>> = vec![
        vec!["eval", "--quantity", "dpetz", "--rho", p(&r), "--sigma", p(&r)],
        vec!["eval", "--quantity", "dmin", "--alpha", "0.5", "--rho", p(&r), "--sigma", p(&big)],
        vec!["eval", "--quantity", "dmin", "--alpha", "-1", "--rho", p(&r), "--sigma", p(&r)],
        vec!["eval", "--quantity", "umegaki", "--rho", p(&r), "--sigma", p(&big), "--max-dim", "2"],
        vec!["eval", "--quantity", "umegaki", "--rho", "/nonexistent.json", "--sigma", p(&r)],
        vec!["smooth", "--state", p(&r), "--b", "", "--eps", "1.5"],
        vec!["hypotest", "--rho", p(&r), "--sigma", p(&r), "--test", "hoeffding"],
        vec!["fig", "--name", "renyi-orgy", "--base", "10"],
        vec!["verify", "--suite", "ns", "--tol", "-1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = qit(&args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unmet_tolerance_exits_three_with_report() {
    let dir = TempDir::new().unwrap();
    let mut s = Sampler::new(4);
    let rho = DensityOperator::from_matrix(s.full_density(4).unwrap(), &[2, 2]).unwrap();
    let path = write_state(&dir, "ab.json", &rho);
    let ok = qit(&["entropy", "--state", p(&path), "--quantity", "min"]);
    assert_eq!(ok.code, 0);
    let out = qit(&["entropy", "--state", p(&path), "--quantity", "min", "--tol", "1e-300"]);
    assert_eq!(out.code, 3);
    let rows = lines(&out.stdout);
    assert_eq!(rows.last().unwrap()["status"], "not_converged");
    assert!(rows[0]["detail"]["certificate"]["duality_gap"].is_number());
    assert_eq!(num(&rows[0], "value"), num(&lines(&ok.stdout)[0], "value"));
}

#[test]
fn entropies_and_smoothing() {
    let dir = TempDir::new().unwrap();
    let phi = (ket(4, 0) + ket(4, 3)).unscale(2f64.sqrt());
    let bell = write_state(&dir, "bell.json", &DensityOperator::pure(&phi, &[2, 2]).unwrap());
    let out = qit(&["entropy", "--state", p(&bell), "--quantity", "min"]);
    assert!((num(&lines(&out.stdout)[0], "value") + 1.0).abs() < 1e-7);
    let out = qit(&["entropy", "--state", p(&bell), "--quantity", "vn", "--base", "e"]);
    let row = &lines(&out.stdout)[0];
    assert!((num(row, "value") + 2f64.ln()).abs() < 1e-9);
    assert_eq!(row["base"], "e");
    let out = qit(&["entropy", "--state", p(&bell), "--family", "petz", "--arrow", "down", "--alpha", "2"]);
    assert!((num(&lines(&out.stdout)[0], "value") + 1.0).abs() < 1e-9);

    let mixed = single(&dir, "mixed.json", diag(&[0.5, 0.5]));
    let out = qit(&["smooth", "--state", p(&mixed), "--b", "", "--eps", "0.1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let row = &lines(&out.stdout)[0];
    assert!((num(row, "value") - (1.0 - (1.0 - 0.01f64).log2())).abs() < 1e-5);
    assert!(num(row, "witness_distance") <= 0.1 + 1e-9);
}

#[test]
fn hypothesis_testing_values() {
    let dir = TempDir::new().unwrap();
    let zero = single(&dir, "zero.json", proj(&ket(2, 0)));
    let plus = single(&dir, "plus.json", real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]]));
    let coin = single(&dir, "coin.json", diag(&[0.5, 0.5]));
    let value = |args: &[&str]| num(&lines(&qit(args).stdout)[0], "value");
    let h = value(&["hypotest", "--rho", p(&zero), "--sigma", p(&plus), "--test", "helstrom"]);
    assert!((h - 0.146446609).abs() < 1e-8);
    let c = value(&["hypotest", "--rho", p(&zero), "--sigma", p(&coin), "--test", "chernoff"]);
    assert!((c - 1.0).abs() < 1e-8);
    let c = value(&["hypotest", "--rho", p(&zero), "--sigma", p(&coin), "--test", "chernoff", "--base", "e"]);
    assert!((c - 2f64.ln()).abs() < 1e-8);
    let np = value(&["hypotest", "--rho", p(&coin), "--sigma", p(&zero), "--test", "neyman-pearson", "--n", "3", "--eps", "0.0"]);
    // reject only 000: α* = 1/8
    assert!((np - 0.125).abs() < 1e-8, "{np}");
}

#[test]
fn uncertainty_and_extraction() {
    let dir = TempDir::new().unwrap();
    let mut s = Sampler::new(6);
    let v = s.pure_vector(8).unwrap();
    let abc = write_state(&dir, "abc.json", &DensityOperator::pure(&v, &[2, 2, 2]).unwrap());
    let out = qit(&["ur", "--state", p(&abc)]);
    let row = &lines(&out.stdout)[0];
    assert!((num(row, "rhs") - 1.0).abs() < 1e-12);
    assert!(num(row, "slack") >= -1e-6);
    let out = qit(&["ur", "--state", p(&abc), "--x-basis", "computational"]);
    assert!(num(&lines(&out.stdout)[0], "rhs").abs() < 1e-12);

    let w = s.simplex(16);
    let cond: Vec<CMat> = (0..16).map(|_| s.full_density(2).unwrap()).collect();
    let src = write_state(&dir, "ze.json", &cq_state(&w, &cond).unwrap());
    let out = qit(&["extract", "--state", p(&src), "--m", "2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let row = &lines(&out.stdout)[0];
    assert!((num(row, "delta") - num(row, "joint_delta")).abs() < 1e-12);
    assert!(num(row, "margin") >= 0.0);
}

#[test]
fn aep_brackets_narrow() {
    let out = qit(&["aep", "--pmf", "0.2,0.8", "--eps", "0.05", "--out", "csv"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows: Vec<Vec<f64>> = out
        .stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).take(6).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let h = 0.7219280948873623;
    for w in rows.windows(2) {
        assert!(w[1][5] - w[1][4] < w[0][5] - w[0][4]);
    }
    for r in &rows {
        assert!(r[4] < h && h < r[5] && r[2] < h && h < r[3]);
    }
    assert!(rows[2][5] - rows[2][4] <= 0.08);
}

#[test]
fn binary_matches_library() {
    let out = Command::new(env!("CARGO_BIN_EXE_qit")).args(["fig", "--name", "tangent", "--base", "e"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lib = qit(&["fig", "--name", "tangent", "--base", "e"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qit")).args(["eval"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
