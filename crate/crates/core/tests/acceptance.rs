//! Numerical acceptance criteria, one test per criterion.
//!
//! Every test prints a single `criterion N: PASS|FAIL ...` line. Wall-clock
//! budgets are enforced here rather than in the suite itself.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use shockvol::config::RunConfig;
use shockvol::verify::{determinism_check, run_check, CheckResult, VerifyContext, CHECKS};

fn ctx() -> &'static VerifyContext {
    static CTX: OnceLock<VerifyContext> = OnceLock::new();
    CTX.get_or_init(|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/verify.conf");
        let cfg = RunConfig::from_file(&path).expect("verify.conf parses");
        VerifyContext::from_config(&cfg).expect("verify model is valid")
    })
}

fn report(id: u32, r: &CheckResult, secs: f64) {
    let spec = CHECKS.iter().find(|c| c.id == id).unwrap();
    let in_time = spec.runtime_limit.is_none_or(|lim| secs < lim);
    let ok = r.passed && in_time;
    let budget = spec.runtime_limit.map_or(String::new(), |l| format!(" budget {l} s"));
    // written straight to stderr so the line shows even when the test passes
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id}: {} {} | measured {:e} tolerance {:e} | {:.3} s{budget} | {}",
        if ok { "PASS" } else { "FAIL" },
        r.name,
        r.measured,
        r.tolerance,
        secs,
        r.detail
    );
    assert!(r.passed, "criterion {id} failed: {}", r.detail);
    assert!(in_time, "criterion {id} exceeded its budget: {secs:.3} s");
}

fn criterion(id: u32) {
    let start = Instant::now();
    let r = run_check(id, ctx());
    report(id, &r, start.elapsed().as_secs_f64());
}

#[test]
fn criterion_01_implied_vol_exact_inverse() {
    criterion(1);
}

#[test]
fn criterion_02_strike_symmetry() {
    criterion(2);
}

#[test]
fn criterion_03_martingale() {
    criterion(3);
}

#[test]
fn criterion_04_pathwise_time_change_bound() {
    criterion(4);
}

#[test]
fn criterion_05_exponential_moment_identity() {
    criterion(5);
}

#[test]
fn criterion_06_f_profile_oracle() {
    criterion(6);
}

#[test]
fn criterion_07_large_time_volatility() {
    criterion(7);
}

#[test]
fn criterion_08_small_maturity_atm_price() {
    criterion(8);
}

#[test]
fn criterion_09_typical_regime_implied_vol() {
    criterion(9);
}

#[test]
fn criterion_10_exponential_moment_trend() {
    criterion(10);
}

#[test]
fn criterion_11_large_strike_tail_trend() {
    criterion(11);
}

#[test]
fn criterion_12_regime_boundary_matching() {
    criterion(12);
}

#[test]
fn criterion_13_comparator_domination() {
    criterion(13);
}

#[test]
fn criterion_14_figure_smile_reproduction() {
    criterion(14);
}

#[test]
fn criterion_15_d_function_and_inverse() {
    criterion(15);
}

#[test]
fn criterion_16_determinism() {
    let start = Instant::now();
    let first: Vec<CheckResult> = (0..16).map(|id| run_check(id, ctx())).collect();
    let r = determinism_check(ctx(), &first);
    report(16, &r, start.elapsed().as_secs_f64());
}

#[test]
fn constant_identities_hold_for_the_verify_model() {
    criterion(0);
}
