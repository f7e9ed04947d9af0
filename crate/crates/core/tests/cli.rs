//! End-to-end runs of the `qes` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qes_quartic::cli::{read_records, Manifest, ResultRecord};
use serde_json::Value;

fn qes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qes")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn records(out: &Output) -> Vec<ResultRecord> {
    read_records(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_n1_two_levels() {
    let out = qes(&["solve", "--dim", "1", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert!((recs[0].energy + 1.5).abs() < 1e-12 && (recs[1].energy - 0.5).abs() < 1e-12);
    assert!(recs.iter().all(|r| r.physical && r.oracle_verdict == "unverified"));
    assert_eq!(recs.iter().map(|r| r.branch_id).collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn solve_n3_closed_form_and_lambdas() {
    let out = qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1"]);
    assert_eq!(code(&out), 0);
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!((r.energy, r.beta), (1.5, 2.0));
    assert_eq!((r.lambda1, r.lambda2, r.lambda4), (-6.0, -2.0, 2.0));
}

#[test]
fn lambda_fields_are_recomputable() {
    for args in [
        vec!["solve", "--dim", "3", "--ell", "1", "--degree", "2", "--alpha", "-0.7"],
        vec!["solve", "--dim", "1", "--ell", "0", "--degree", "4", "--alpha", "0.6", "--beta", "1.7"],
    ] {
        for r in records(&qes(&args)) {
            let k = (r.dim + 2 * r.ell + 2 * r.degree) as f64;
            assert_eq!(r.lambda1, -(k + 1.0) * r.beta / 2.0);
            assert_eq!(r.lambda2, r.alpha * r.beta);
            assert_eq!(r.lambda4, r.beta * r.beta / 2.0);
        }
    }
}

#[test]
fn rejected_records_are_flagged() {
    let out = qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "2", "--alpha", "-1"]);
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r.physical).count(), 1);
    let bad = recs.iter().find(|r| !r.physical).unwrap();
    assert!(bad.beta < 0.0);
    assert_eq!(bad.reject_reason.as_deref(), Some("non-positive-beta"));

    // complex pair: no coefficients, residual carries |Im E|
    let out = qes(&["solve", "--dim", "1", "--ell", "0", "--degree", "2", "--alpha", "1", "--beta", "1"]);
    let complex: Vec<_> = records(&out).into_iter().filter(|r| !r.physical).collect();
    assert_eq!(complex.len(), 2);
    assert!(complex.iter().all(|r| r.coefficients.is_empty() && r.residual > 0.0));
}

#[test]
fn exit_codes() {
    // β is solved for N > 1
    assert_eq!(code(&qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "1"])), 2);
    // β is required for N = 1
    assert_eq!(code(&qes(&["solve", "--dim", "1", "--ell", "0", "--degree", "1", "--alpha", "-1"])), 2);
    assert_eq!(code(&qes(&["solve", "--dim", "1", "--ell", "1", "--degree", "1", "--alpha", "-1", "--beta", "1"])), 2);
    assert_eq!(code(&qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "0"])), 2);
    assert_eq!(code(&qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1"])), 2);
    assert_eq!(code(&qes(&["solve", "--bogus"])), 2);
    assert_eq!(
        code(&qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--tol", "nope=1"])),
        2
    );
    // α > 0 at m = 1: only β < 0
    assert_eq!(code(&qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "1"])), 1);
    assert_eq!(code(&qes(&["--help"])), 0);
}

#[test]
fn csv_output_has_fixed_columns() {
    let out = qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "2", "--alpha", "-1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with(
        "dim,ell,degree,alpha,beta,energy,lambda1,lambda2,lambda4,coefficients,physical,residual,oracle_verdict,branch_id"
    ));
    let recs = read_records(&text).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].coefficients.len(), 3);
}

#[test]
fn json_lines_have_sorted_keys() {
    let out = qes(&["solve", "--dim", "1", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "1"]);
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let positions: Vec<usize> = keys.iter().map(|k| line.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
        for k in ["alpha", "beta", "branch_id", "coefficients", "oracle_verdict", "physical", "residual"] {
            assert!(v.get(k).is_some(), "{k} missing");
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sector\ndim = 3\nell = 0\ndegree = 1\nalpha = -2\nformat = csv\n").unwrap();
    let out = qes(&["solve", "--config", path(&cfg), "--alpha", "-1", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let recs = records(&out);
    assert_eq!((recs[0].alpha, recs[0].energy), (-1.0, 1.5));
    let out = qes(&["solve", "--config", path(&cfg)]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("dim,ell"));
}

#[test]
fn niven_examples() {
    let out = qes(&["niven", "--dim", "1", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let mut zeros: Vec<f64> = lines.iter().map(|v| v["zeros"][0][0].as_f64().unwrap()).collect();
    zeros.sort_by(f64::total_cmp);
    assert_eq!(zeros.len(), 2);
    assert!((zeros[0] + 1.0).abs() < 1e-10 && (zeros[1] - 1.0).abs() < 1e-10);

    let out = qes(&["niven", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "2"]);
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let at_one = lines
        .iter()
        .find(|v| (v["zeros"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-10 && v["zeros"][0][1].as_f64().unwrap() == 0.0)
        .unwrap();
    assert_eq!(at_one["consistency"], "pass");

    let out = qes(&["niven", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.is_empty());
    assert!(text.lines().all(|l| l.contains("\"consistency\":\"fail\"")));

    let out = qes(&["niven", "--dim", "3", "--ell", "0", "--degree", "0", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_round_trip_tamper_and_empty() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.jsonl");
    let out = qes(&["solve", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--output", path(&good)]);
    assert_eq!(code(&out), 0);
    let out = qes(&["verify", "--input", path(&good)]);
    assert_eq!(code(&out), 0);
    let recs = records(&out);
    assert_eq!(recs[0].oracle_verdict, "confirmed");
    assert!(recs[0].ode_residual.unwrap() < 1e-8);
    assert_eq!(recs[0].matched_index, Some(1));

    let text = fs::read_to_string(&good).unwrap().replace("\"energy\":1.5", "\"energy\":1.6");
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, text).unwrap();
    let out = qes(&["verify", "--input", path(&bad)]);
    assert_eq!(code(&out), 1);
    assert_eq!(records(&out)[0].oracle_verdict, "unmatched");

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = qes(&["verify", "--input", path(&empty)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));

    assert_eq!(code(&qes(&["verify", "--input", path(&dir.path().join("missing.jsonl"))])), 2);
    let junk = dir.path().join("junk.jsonl");
    fs::write(&junk, "{not json}\n").unwrap();
    assert_eq!(code(&qes(&["verify", "--input", path(&junk)])), 2);
}

#[test]
fn verify_reads_csv_and_rejects_bad_grid() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m2.csv");
    let out = qes(&[
        "solve", "--dim", "2", "--ell", "1", "--degree", "2", "--alpha", "-1", "--format", "csv", "--output", path(&file),
    ]);
    assert_eq!(code(&out), 0);
    let out = qes(&["verify", "--input", path(&file), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let recs = read_records(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let physical: Vec<_> = recs.iter().filter(|r| r.physical).collect();
    assert!(physical.iter().all(|r| r.oracle_verdict == "confirmed"));
    assert!(recs.iter().any(|r| !r.physical && r.oracle_verdict == "non-normalizable"));
    assert_eq!(code(&qes(&["verify", "--input", path(&file), "--grid-points", "10"])), 2);
}

#[test]
fn sweep_writes_cases_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = qes(&[
        "sweep", "--dim", "3", "--ell-range", "0:2", "--degree-range", "1:2", "--alpha", "-1", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.cases.len(), 6);
    assert_eq!(manifest.seed, 42);
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));
    for case in &manifest.cases {
        assert!(dir.path().join(&case.output).exists());
        assert_eq!(case.status, "completed");
    }
    let l0: Vec<_> = manifest.cases.iter().filter(|c| c.ell == 0).collect();
    assert_eq!((l0[0].degree, l0[0].physical, l0[0].records), (1, 1, 1));
    assert_eq!((l0[1].degree, l0[1].physical, l0[1].records), (2, 1, 2));

    let bad = qes(&["sweep", "--dim", "3", "--ell-range", "2:0", "--degree-range", "1:2", "--alpha", "-1", "--out", path(dir.path())]);
    assert_eq!(code(&bad), 2);
    // N = 1 has no l = 1 sector; that case fails, the rest complete
    let mixed = tempfile::tempdir().unwrap();
    let out = qes(&[
        "sweep", "--dim", "1", "--ell-range", "0:1", "--degree-range", "0:1", "--alpha", "-1", "--beta", "1", "--out",
        path(mixed.path()),
    ]);
    assert_eq!(code(&out), 1);
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(mixed.path().join("manifest.json")).unwrap()).unwrap();
    let failed = manifest.cases.iter().filter(|c| c.status == "failed").count();
    assert_eq!(failed, 2);
}

fn matrix_json(args: &[&str]) -> (i32, Value, String) {
    let out = qes(args);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (code(&out), v, text)
}

fn entries(v: &Value) -> Vec<Vec<f64>> {
    v["entries"].as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()).collect()
}

#[test]
fn matrix_examples() {
    let (c, v, text) = matrix_json(&["matrix", "--kind", "P", "--degree", "1", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(c, 0);
    assert_eq!(entries(&v), vec![vec![0.0, -2.0], vec![-2.0, 0.0]]);
    assert!(text.contains("-2.0000000000000000e0"), "{text}");
    assert_eq!((v["rows"].as_u64(), v["cols"].as_u64(), v["kind"].as_str()), (Some(2), Some(2), Some("P")));

    let (c, v, _) = matrix_json(&["matrix", "--kind", "Q", "--dim", "3", "--ell", "0", "--degree", "1", "--alpha", "-1", "--energy", "1.5"]);
    assert_eq!(c, 0);
    assert_eq!(entries(&v), vec![vec![-1.0, -1.0], vec![-4.0, -4.0]]);

    let (c, v, _) = matrix_json(&["matrix", "--kind", "F", "--degree", "0", "--dim", "1", "--ell", "0", "--alpha", "-1", "--energy", "0.2"]);
    assert_eq!(c, 0);
    assert_eq!((v["rows"].as_u64(), v["cols"].as_u64()), (Some(2), Some(1)));

    // a third of 1 needs all 17 digits to round-trip
    let (_, v, _) = matrix_json(&["matrix", "--kind", "F", "--degree", "0", "--dim", "1", "--ell", "0", "--alpha", "-1", "--energy", "0.3333333333333333"]);
    assert_eq!(entries(&v)[1][0], -(2.0 * 0.3333333333333333 + 1.0));
}

#[test]
fn matrix_missing_inputs() {
    assert_eq!(code(&qes(&["matrix", "--kind", "F", "--degree", "0", "--dim", "1", "--alpha", "-1"])), 2);
    assert_eq!(code(&qes(&["matrix", "--kind", "Q", "--degree", "1", "--dim", "3", "--alpha", "-1"])), 2);
    assert_eq!(code(&qes(&["matrix", "--kind", "P", "--degree", "1", "--alpha", "-1"])), 2);
    assert_eq!(code(&qes(&["matrix", "--kind", "Q", "--degree", "1", "--dim", "1", "--alpha", "-1", "--energy", "0"])), 2);
    assert_eq!(code(&qes(&["matrix", "--kind", "P", "--degree", "0", "--alpha", "-1"])), 0);
}
