//! End-to-end runs of the `shockvol` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use shockvol::cli::{cmd_price, sha256_hex, Cell};
use shockvol::config::RunConfig;
use shockvol::verify::{run_check, VerifyContext};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shockvol"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn value(rows: &[Vec<String>], name: &str) -> f64 {
    rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap()
}

#[test]
fn constants_echo_figure_configuration() {
    let cfg = configs().join("figure.conf");
    let (code, out, _) = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert!((value(&rows, "C_sf") - 0.5).abs() < 1e-12);
    assert!((value(&rows, "sigma0") - 0.1).abs() < 1e-12);
    assert!(value(&rows, "tau0") < 0.0);
}

#[test]
fn constants_near_brownian_limit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.conf", "D = 0.499999\nV = 1\nlambda = 1\ntau0 = -1\n");
    let (code, out, _) = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert!((value(&rows, "sigma0") - 1.0).abs() < 1e-4);
    assert!((value(&rows, "c_sf") - 1.0).abs() < 1e-4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.conf", "V = 1\nD = 0.6\n");
    let (code, _, err) = run(&["constants", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.conf:2") && err.contains("`D`"), "{err}");

    let empty = write(dir.path(), "empty.conf", "kappas =\n");
    assert_eq!(run(&["smile", "--config", empty.to_str().unwrap()]).0, 2);

    assert_eq!(run(&["price", "--format", "xml"]).0, 2);
    assert_eq!(run(&["price", "--samples", "0"]).0, 2);
    assert_eq!(run(&["constants", "--config", "/nonexistent/x.conf"]).0, 2);
}

#[test]
fn price_rows_symmetric_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.conf", "kappas = -0.49:0.49:50\nt = 0.1\nsamples = 20000\n");
    let out = dir.path().join("p.csv");
    let (code, _, _) = run(&["price", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 50);
    for i in 0..25 {
        let a: f64 = rows[i][4].parse().unwrap();
        let b: f64 = rows[49 - i][4].parse().unwrap();
        assert!((a / b - 1.0).abs() < 1e-8, "row {i}: {a} vs {b}");
    }
}

#[test]
fn price_rows_do_not_depend_on_the_rest_of_the_grid() {
    let mut c = RunConfig { samples: 5000, ts: vec![0.05], ..RunConfig::default() };
    c.kappas = vec![-0.2, 0.0, 0.1, 0.3];
    let full = cmd_price(&c).unwrap().tables.remove(0).1;
    for (i, &k) in c.kappas.iter().enumerate() {
        let single = RunConfig { kappas: vec![k], ..c.clone() };
        let row = &cmd_price(&single).unwrap().tables[0].1.rows[0];
        assert_eq!(row, &full.rows[i]);
    }
}

#[test]
fn manifest_checksums_and_bitwise_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("price.conf");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let (code, _, _) = run(&["price", "--config", cfg.to_str().unwrap(), "--samples", "20000", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][0]["sha256"], sha256_hex(&bytes));
    assert_eq!(manifest["command"], "price");
    assert_eq!(manifest["config"]["samples"], 20000);

    // the echoed configuration reproduces the data
    let text = manifest["config_text"].as_str().unwrap().replace(&format!("out = {}\n", a.display()), "");
    let echo = write(dir.path(), "echo.conf", &text);
    let (code, out, _) = run(&["price", "--config", echo.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.as_bytes(), &bytes[..]);
}

#[test]
fn chunking_changes_streams_but_not_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("price.conf");
    let run_with = |threads: &str| {
        let out = bin()
            .args(["price", "--config", cfg.to_str().unwrap(), "--samples", "30000", "--chunk", "4096"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        out.stdout
    };
    assert_eq!(run_with("1"), run_with("3"));
    drop(dir);
}

#[test]
fn json_format_has_columns_and_rows() {
    let (code, out, _) = run(&["constants", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["columns"][0], "name");
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn tail_rows_match_typical_limits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.conf", "kappas = 0, 0.001\nt = 0.0001\nsamples = 200000\n");
    let (code, out, _) = run(&["tail", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let at_money: f64 = rows[0][2].parse().unwrap();
    assert!((at_money - 0.5f64.ln()).abs() < 0.01, "{at_money}");
    // typical regime: mc and asymptote agree on the Gaussian tail
    assert_eq!(rows[1][6], "D");
    let mc: f64 = rows[1][2].parse().unwrap();
    let asym: f64 = rows[1][4].parse().unwrap();
    assert!((mc / asym - 1.0).abs() < 0.05, "{mc} vs {asym}");
}

#[test]
fn smile_ratio_approaches_one_in_typical_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.conf", "kappa = 0\nts = 0.00001, 0.001, 0.1\nsamples = 200000\n");
    let (code, out, _) = run(&["smile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let gaps: Vec<f64> = rows.iter().map(|r| (r[6].parse::<f64>().unwrap() - 1.0).abs()).collect();
    assert!(gaps[0] < gaps[1] && gaps[1] < gaps[2], "{gaps:?}");
}

#[test]
fn ou_bound_dominates_and_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ou.csv");
    let cfg = configs().join("ou.conf");
    let (code, _, _) = run(&["ou-bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let paths = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(paths.len(), 4 * 2 * 10_000);
    assert!(paths.iter().all(|r| r[5] == "true"));
    let prices = csv_rows(&std::fs::read_to_string(dir.path().join("ou.prices.csv")).unwrap());
    assert_eq!(prices.len(), 4 * 2 * 3);
    assert!(prices.iter().all(|r| r[5] == "true"));

    // larger constant jumps bring the comparator closer from below
    let c_tilde = |law: &str| -> f64 {
        prices.iter().find(|r| r[0] == law && r[2].starts_with("0.0") && r[1].starts_with("5.0")).unwrap()[3].parse().unwrap()
    };
    assert!(c_tilde("constant:0.1") < c_tilde("constant:10"));
}

#[test]
fn perturbed_model_fails_constant_identity() {
    let cfg = RunConfig::from_file(&configs().join("verify.conf")).unwrap();
    let ok = VerifyContext::from_config(&cfg).unwrap();
    assert!(run_check(0, &ok).passed);
    let perturbed = RunConfig { d: 0.31, ..cfg };
    let r = run_check(0, &VerifyContext::from_config(&perturbed).unwrap());
    assert!(!r.passed, "{r:?}");
}

#[test]
fn error_column_is_empty_for_clean_rows() {
    let c = RunConfig { samples: 2000, ..RunConfig::default() };
    let t = cmd_price(&c).unwrap().tables.remove(0).1;
    assert_eq!(t.rows[0][7], Cell::Empty);
}
