//! Numerical acceptance suite shared by `shockvol verify` and the `acceptance` test target.
//!
//! Each check returns its measured statistic, the tolerance it is held to and a
//! short deterministic detail string. Timing is kept out of the results so a
//! rerun with the same seed reproduces the report byte for byte.

use std::time::Instant;

use rand::Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{
    bkappa1, bkappa2, classify, d_function, d_inverse, d_inverse_seed, f_brute, f_profile, f_term, f_threshold,
    matched_boundaries, smile_curve, smile_formula, tail_formula, BoundaryRule, RegimeLabel, Thresholds,
};
use crate::config::{ExpectedConstants, RunConfig};
use crate::model::{
    derive_constants, it_upper_bound, mean_sigma_squared, sigma0_to_tau0, spot_volatility, DerivedConstants, JumpTimes,
    ModelParams, QueryPoint,
};
use crate::pricing::{bs_call, implied_vol, implied_vol_of, normal_cdf, ou_price_pair, price_call_mc, total_vol_sensitivity};
use crate::rng::{merge_all, run_chunks, Moments, SeedSpec};
use crate::simulate::{
    estimate_tail, exp_moment_mc, exp_moment_series_bound, fill_jump_times, mean_over_it, mean_over_log_price,
    ou_comparator_batch, ItSampler, McConfig, OuSpec, DEFAULT_SERIES_CAP, TAG_JUMPS,
};

const TAG_VERIFY: u64 = 0x5645_5249;

/// Static description of one check.
#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub id: u32,
    pub name: &'static str,
    /// Wall-clock budget in seconds, enforced by the acceptance target only.
    pub runtime_limit: Option<f64>,
}

pub const CHECKS: [CheckSpec; 17] = [
    CheckSpec { id: 0, name: "constant identities", runtime_limit: None },
    CheckSpec { id: 1, name: "implied-vol exact inverse", runtime_limit: Some(1.0) },
    CheckSpec { id: 2, name: "strike symmetry", runtime_limit: Some(10.0) },
    CheckSpec { id: 3, name: "martingale", runtime_limit: None },
    CheckSpec { id: 4, name: "pathwise time-change bound", runtime_limit: None },
    CheckSpec { id: 5, name: "exponential moment identity", runtime_limit: None },
    CheckSpec { id: 6, name: "f profile oracle", runtime_limit: None },
    CheckSpec { id: 7, name: "large-time volatility", runtime_limit: None },
    CheckSpec { id: 8, name: "small-maturity ATM price", runtime_limit: Some(30.0) },
    CheckSpec { id: 9, name: "typical-regime implied vol", runtime_limit: None },
    CheckSpec { id: 10, name: "exponential-moment asymptote trend", runtime_limit: None },
    CheckSpec { id: 11, name: "large-strike tail trend", runtime_limit: None },
    CheckSpec { id: 12, name: "regime boundary matching", runtime_limit: None },
    CheckSpec { id: 13, name: "comparator domination", runtime_limit: None },
    CheckSpec { id: 14, name: "figure smile reproduction", runtime_limit: None },
    CheckSpec { id: 15, name: "D and its inverse", runtime_limit: None },
    CheckSpec { id: 16, name: "determinism", runtime_limit: None },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: SeedSpec,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Inputs shared by all checks.
#[derive(Debug, Clone)]
pub struct VerifyContext {
    pub params: ModelParams,
    pub consts: DerivedConstants,
    pub seed: SeedSpec,
    pub chunk: usize,
    pub ou_specs: Vec<OuSpec>,
    pub expected: ExpectedConstants,
}

impl VerifyContext {
    pub fn from_config(c: &RunConfig) -> crate::Result<Self> {
        let params = c.params()?;
        Ok(Self {
            consts: derive_constants(&params)?,
            params,
            seed: SeedSpec::new(c.seed, c.stream),
            chunk: c.chunk,
            ou_specs: c.ou_specs(),
            expected: c.expected,
        })
    }

    fn mc(&self, id: u32, n: usize) -> McConfig {
        let seed = self.seed.with_stream(self.seed.stream_index.wrapping_add(u64::from(id) << 32));
        McConfig::new(n, seed).with_chunk(self.chunk)
    }
}

fn result(id: u32, passed: bool, measured: f64, tolerance: f64, detail: String) -> CheckResult {
    let name = CHECKS.iter().find(|c| c.id == id).map_or("unknown", |c| c.name);
    CheckResult { id, name: name.into(), passed, measured, tolerance, detail }
}

fn failed(id: u32, tolerance: f64, err: crate::Error) -> CheckResult {
    result(id, false, f64::NAN, tolerance, format!("error: {err}"))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Run one of checks `0..=15`. Check 16 needs a reference run, see [`determinism_check`].
pub fn run_check(id: u32, ctx: &VerifyContext) -> CheckResult {
    match id {
        0 => check_constants(ctx),
        1 => check_inverse(ctx),
        2 => check_symmetry(ctx),
        3 => check_martingale(ctx),
        4 => check_pathwise_bound(ctx),
        5 => check_exp_moment_identity(ctx),
        6 => check_f_oracle(),
        7 => check_large_time(ctx),
        8 => check_atm_price(ctx),
        9 => check_atm_vol(ctx),
        10 => check_series_trend(),
        11 => check_tail_trend(ctx),
        12 => check_boundaries(ctx),
        13 => check_comparator(ctx),
        14 => check_figure(),
        15 => check_d_function(),
        _ => result(id, false, f64::NAN, f64::NAN, "no such check".into()),
    }
}

/// Rerun checks `0..=15` and compare with `reference` bit for bit.
pub fn determinism_check(ctx: &VerifyContext, reference: &[CheckResult]) -> CheckResult {
    let rerun: Vec<CheckResult> = (0..16).map(|id| run_check(id, ctx)).collect();
    let a = serde_json::to_string(reference).unwrap_or_default();
    let b = serde_json::to_string(&rerun).unwrap_or_default();
    let differing: Vec<String> = reference
        .iter()
        .zip(&rerun)
        .filter(|(x, y)| serde_json::to_string(x).ok() != serde_json::to_string(y).ok())
        .map(|(x, _)| x.id.to_string())
        .collect();
    let same = a == b && reference.len() == rerun.len();
    let detail = if same { "16 checks reproduced".to_string() } else { format!("differs in checks [{}]", differing.join(",")) };
    result(16, same, differing.len() as f64, 0.0, detail)
}

/// Run the full suite; the second element holds per-check wall time in seconds.
pub fn run_suite_timed(ctx: &VerifyContext) -> (VerifyReport, Vec<f64>) {
    let mut checks = Vec::with_capacity(CHECKS.len());
    let mut secs = Vec::with_capacity(CHECKS.len());
    for id in 0..16 {
        let start = Instant::now();
        checks.push(run_check(id, ctx));
        secs.push(start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    let det = determinism_check(ctx, &checks);
    secs.push(start.elapsed().as_secs_f64());
    checks.push(det);
    (VerifyReport { seed: ctx.seed, checks }, secs)
}

pub fn run_suite(ctx: &VerifyContext) -> VerifyReport {
    run_suite_timed(ctx).0
}

fn check_constants(ctx: &VerifyContext) -> CheckResult {
    let k = &ctx.consts;
    let p = &k.params;
    let d = p.d;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut track = |label: &str, got: f64, want: f64| {
        let e = rel(got, want);
        if !(e <= 1e-12) {
            notes.push(format!("{label}: {got:.16e} vs {want:.16e}"));
        }
        worst = worst.max(if e.is_nan() { f64::INFINITY } else { e });
    };
    track("sigma0", k.sigma0, k.c_sf * (2.0 * d).sqrt() * (-p.tau0).powf(d - 0.5));
    if let Ok(tau0) = sigma0_to_tau0(k.sigma0, d, p.v, p.lambda) {
        track("tau0 round trip", tau0, p.tau0);
    }
    let e = ctx.expected;
    for (label, want, got) in [
        ("c_sf", e.c_sf, k.c_sf),
        ("sigma0 reference", e.sigma0, k.sigma0),
        ("C_sf", e.cap_c_sf, k.cap_c_sf),
        ("C_tilde", e.c_tilde, k.c_tilde),
    ] {
        if let Some(w) = want {
            track(label, got, w);
        }
    }
    let detail = if notes.is_empty() { "all identities hold".into() } else { notes.join("; ") };
    result(0, worst <= 1e-12, worst, 1e-12, detail)
}

fn check_inverse(ctx: &VerifyContext) -> CheckResult {
    let tol = 1e-10;
    let mut rng = ctx.seed.rng(TAG_VERIFY, 1);
    let mut worst = 0.0f64;
    let mut bad = 0;
    let mut ill_posed = 0;
    for _ in 0..1000 {
        let kappa = rng.random_range(-2.0..=2.0);
        let sigma = rng.random_range(0.01..=5.0);
        let t = 10f64.powf(rng.random_range(-4.0..=1.0));
        let q = QueryPoint { kappa, t };
        let v = sigma * t.sqrt();
        let err = match implied_vol(bs_call(kappa, v), q) {
            Ok(s) => (s - sigma).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(err);
        if !(err <= tol) {
            bad += 1;
            // price rounding alone moves sigma by more than the tolerance
            if total_vol_sensitivity(kappa, v) / t.sqrt() > tol {
                ill_posed += 1;
            }
        }
    }
    let detail = format!(
        "{bad} of 1000 points above tolerance, {ill_posed} of them ill-conditioned in double precision; {} of {} well-conditioned points within tolerance",
        1000 - bad,
        1000 - ill_posed
    );
    result(1, bad == 0, worst, tol, detail)
}

fn check_symmetry(ctx: &VerifyContext) -> CheckResult {
    // analytic identity against the textbook two-term formula
    let mut analytic = 0.0f64;
    for i in 0..=40 {
        let kappa = -2.0 + 0.1 * i as f64;
        for j in 0..=30 {
            let v = 0.01 + 0.1 * j as f64;
            let lhs = bs_call(-kappa, v);
            let rhs = 1.0 - (-kappa).exp() + (-kappa).exp() * bs_call(kappa, v);
            let d1 = -kappa / v + v / 2.0;
            let direct = normal_cdf(d1) - kappa.exp() * normal_cdf(d1 - v);
            analytic = analytic.max((lhs - rhs).abs()).max((bs_call(kappa, v) - direct).abs());
        }
    }
    // shared-draw model prices and vols
    let mut price_gap = 0.0f64;
    let mut vol_gap = 0.0f64;
    let mc = ctx.mc(2, 100_000);
    for &t in &[0.01, 0.1, 1.0] {
        for &kappa in &[0.05, 0.2, 0.5] {
            let up = mean_over_it(&ctx.consts, t, mc, |i| bs_call(kappa, i.sqrt()));
            let down = mean_over_it(&ctx.consts, t, mc, |i| bs_call(-kappa, i.sqrt()));
            let (Ok(up), Ok(down)) = (up, down) else {
                return result(2, false, f64::NAN, 1e-14, "estimator failed".into());
            };
            let implied = 1.0 - (-kappa).exp() + (-kappa).exp() * up.value;
            price_gap = price_gap.max((down.value - implied).abs());
            let sv = (implied_vol(up.value, QueryPoint { kappa, t }), implied_vol(down.value, QueryPoint { kappa: -kappa, t }));
            match sv {
                (Ok(a), Ok(b)) => vol_gap = vol_gap.max(rel(b, a)),
                _ => vol_gap = f64::INFINITY,
            }
        }
    }
    let ok = analytic <= 1e-14 && price_gap <= 1e-12 && vol_gap <= 1e-8;
    let detail = format!("analytic {analytic:.3e} (tol 1e-14), mc price {price_gap:.3e} (tol 1e-12), mc vol {vol_gap:.3e} (tol 1e-8)");
    result(2, ok, analytic, 1e-14, detail)
}

fn check_martingale(ctx: &VerifyContext) -> CheckResult {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &t in &[0.01, 0.1, 1.0] {
        match mean_over_log_price(&ctx.params, t, ctx.mc(3, 1_000_000), f64::exp) {
            Ok(e) => {
                let z = (e.value - 1.0).abs() / e.std_error;
                worst = worst.max(z);
                parts.push(format!("t={t}: {:.8} se {:.2e}", e.value, e.std_error));
            }
            Err(err) => return failed(3, 3.0, err),
        }
    }
    result(3, worst <= 3.0, worst, 3.0, parts.join("; "))
}

fn check_pathwise_bound(ctx: &VerifyContext) -> CheckResult {
    let mut total = 0usize;
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    for (idx, &t) in [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0].iter().enumerate() {
        let Ok(sampler) = ItSampler::new(&ctx.consts, t) else {
            return result(4, false, f64::NAN, 0.0, "sampler rejected t".into());
        };
        let mc = ctx.mc(4, 100_000);
        let seed = mc.seed.with_stream(mc.seed.stream_index + idx as u64);
        let counts = run_chunks(seed, TAG_VERIFY, mc.n, mc.chunk, |rng, _, count| {
            let mut bad = 0usize;
            let mut slack = f64::INFINITY;
            for _ in 0..count {
                let (i, n) = sampler.draw(rng);
                let bound = it_upper_bound(&ctx.consts, n, t);
                if !(i <= bound) {
                    bad += 1;
                }
                slack = slack.min((bound - i) / bound);
            }
            (bad, slack)
        });
        for (b, s) in counts {
            violations += b;
            tightest = tightest.min(s);
        }
        total += mc.n;
    }
    let detail = format!("{violations} violations in {total} pairs, smallest relative slack {tightest:.3e}");
    result(4, violations == 0, violations as f64, 0.0, detail)
}

fn check_exp_moment_identity(ctx: &VerifyContext) -> CheckResult {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &t in &[0.01, 0.1] {
        let a = exp_moment_mc(&ctx.params, 1.0, t, ctx.mc(5, 1_000_000));
        let b = mean_over_log_price(&ctx.params, t, ctx.mc(5, 1_000_000), |x| (2.0 * x).exp());
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a.estimate, b),
            (Err(e), _) | (_, Err(e)) => return failed(5, 3.0, e),
        };
        let z = (a.value - b.value).abs() / a.std_error.hypot(b.std_error);
        worst = worst.max(z);
        parts.push(format!("t={t}: {:.8} vs {:.8}", a.value, b.value));
    }
    result(5, worst <= 3.0, worst, 3.0, parts.join("; "))
}

fn check_f_oracle() -> CheckResult {
    let Ok(consts) = ModelParams::new(0.3, 1.0, 5.0, -1.0).and_then(|p| derive_constants(&p)) else {
        return result(6, false, f64::NAN, 0.0, "model rejected".into());
    };
    let mut rng = SeedSpec::new(6, 0).rng(TAG_VERIFY, 6);
    let samples: Vec<f64> = (0..10_000).map(|_| 10f64.powf(rng.random_range(-2.0..=2.0))).collect();
    let mismatches = samples
        .par_iter()
        .filter(|&&a| match f_profile(a, &consts) {
            Ok(fp) => {
                let fb = f_brute(a, &consts, 10_000);
                fp.value != fb.value
            }
            Err(_) => true,
        })
        .count();
    let mut tie = 0.0f64;
    for k in 1..=100u64 {
        let x = f_threshold(k, &consts);
        tie = tie.max(rel(f_term(k, x, &consts), f_term(k + 1, x, &consts)));
    }
    let ok = mismatches == 0 && tie <= 1e-12;
    let detail = format!("{mismatches} mismatches in 10000 values, worst threshold tie {tie:.3e} (tol 1e-12)");
    result(6, ok, mismatches as f64, 0.0, detail)
}

fn check_large_time(ctx: &VerifyContext) -> CheckResult {
    let k = &ctx.consts;
    let p = &k.params;
    let t = 50.0 / p.lambda;
    let quad = mean_sigma_squared(k, t);
    let v2 = p.v * p.v;
    let limit_gap = rel(quad, v2);
    let Ok(exp) = Exp::new(p.lambda) else {
        return result(7, false, f64::NAN, 0.01, "bad rate".into());
    };
    let mc = ctx.mc(7, 1_000_000);
    let parts = run_chunks(mc.seed, TAG_JUMPS, mc.n, mc.chunk, |rng, _, count| {
        let mut m = Moments::default();
        let mut jumps = JumpTimes::empty(t);
        for _ in 0..count {
            fill_jump_times(rng, &exp, t, &mut jumps.times);
            m.push(spot_volatility(k, &jumps, t).powi(2));
        }
        m
    });
    let m = merge_all(&parts);
    let z = (m.mean() - quad).abs() / m.std_error();
    let ok = limit_gap <= 0.01 && z <= 3.0;
    let detail = format!(
        "quadrature {quad:.10} vs V^2 {v2:.10} (gap {limit_gap:.3e}, tol 1e-2); mc {:.8} se {:.2e}, {z:.3} se away (tol 3)",
        m.mean(),
        m.std_error()
    );
    result(7, ok, limit_gap, 0.01, detail)
}

fn atm_estimate(ctx: &VerifyContext) -> crate::Result<crate::pricing::PriceEstimate> {
    price_call_mc(&ctx.params, QueryPoint::new(0.0, 1e-4)?, ctx.mc(8, 1_000_000))
}

fn check_atm_price(ctx: &VerifyContext) -> CheckResult {
    let t = 1e-4;
    match atm_estimate(ctx) {
        Ok(est) => {
            let scale = ctx.consts.sigma0 * (t / (2.0 * std::f64::consts::PI)).sqrt();
            let r = est.call.value / scale;
            let detail = format!("price {:.10e} se {:.2e}, ratio {r:.6} (band [0.98, 1.02])", est.call.value, est.call.std_error);
            result(8, (0.98..=1.02).contains(&r), r, 0.02, detail)
        }
        Err(e) => failed(8, 0.02, e),
    }
}

fn check_atm_vol(ctx: &VerifyContext) -> CheckResult {
    let s0 = ctx.consts.sigma0;
    match atm_estimate(ctx).and_then(|e| implied_vol_of(&e)) {
        Ok(iv) => {
            let dev = (iv.value - s0).abs() / s0;
            let band = dev + 3.0 * iv.std_error / s0;
            let detail = format!("iv {:.8} se {:.2e} vs sigma0 {s0:.8}; deviation plus 3 se = {band:.4e}", iv.value, iv.std_error);
            result(9, band <= 0.03, dev, 0.03, detail)
        }
        Err(e) => failed(9, 0.03, e),
    }
}

/// Ratio of the series bound to its leading asymptote at `(b, t)`.
pub fn series_asymptote_ratio(consts: &DerivedConstants, b: f64, t: f64) -> crate::Result<f64> {
    let d = consts.d();
    let s = exp_moment_series_bound(consts, b, t, DEFAULT_SERIES_CAP)?;
    let lead = consts.c_tilde * t * b.powf(1.0 / (2.0 * d)) * b.ln().powf((2.0 * d - 1.0) / (2.0 * d));
    Ok(s.log_value / lead)
}

fn check_series_trend() -> CheckResult {
    // slow intensity: at lambda = 5 the log-b corrections keep the ratio near 1.7 at b = 1e4
    let consts = match ModelParams::new(0.3, 1.0, 0.1, -1.0).and_then(|p| derive_constants(&p)) {
        Ok(c) => c,
        Err(e) => return failed(10, 0.25, e),
    };
    let mut ratios = Vec::new();
    for &b in &[1e2, 1e3, 1e4] {
        match series_asymptote_ratio(&consts, b, 0.1) {
            Ok(r) => ratios.push(r),
            Err(e) => return failed(10, 0.25, e),
        }
    }
    let toward_one = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs() && w[1] < w[0]);
    let last = (ratios[2] - 1.0).abs();
    let detail = format!("ratios {:.6}, {:.6}, {:.6} at b = 1e2, 1e3, 1e4", ratios[0], ratios[1], ratios[2]);
    result(10, toward_one && last <= 0.25, last, 0.25, detail)
}

fn check_tail_trend(ctx: &VerifyContext) -> CheckResult {
    let mut ratios = Vec::new();
    for &t in &[0.5, 0.1, 0.02] {
        let r = QueryPoint::new(1.0, t).and_then(|q| {
            let p = estimate_tail(&ctx.params, q, ctx.mc(11, 10_000_000))?;
            Ok(p.value.ln() / tail_formula(RegimeLabel::ALargeStrike, q, &ctx.consts)?)
        });
        match r {
            Ok(r) => ratios.push(r),
            Err(e) => return failed(11, 0.35, e),
        }
    }
    let toward_one = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let last = (ratios[2] - 1.0).abs();
    let detail = format!("ratios {:.6}, {:.6}, {:.6} at t = 0.5, 0.1, 0.02", ratios[0], ratios[1], ratios[2]);
    result(11, toward_one && last <= 0.35 && last.is_finite(), last, 0.35, detail)
}

/// The three matching ratios at `t`: B/A at `a = 100`, B/C at `a = 0.1`, and C over `sigma0` at the lower edge.
pub fn boundary_ratios(consts: &DerivedConstants, t: f64) -> crate::Result<[f64; 3]> {
    let d = consts.d();
    let b2 = bkappa2(t, d)?;
    let at = |a: f64| QueryPoint { kappa: a * b2, t };
    let ba = smile_formula(RegimeLabel::BKappa2Scale, at(100.0), consts)?
        / smile_formula(RegimeLabel::ALargeStrike, at(100.0), consts)?;
    let bc = smile_formula(RegimeLabel::BKappa2Scale, at(0.1), consts)?
        / smile_formula(RegimeLabel::CIntermediate, at(0.1), consts)?;
    let edge = QueryPoint { kappa: (2.0 * d + 1.0).sqrt() * consts.sigma0 * bkappa1(t)?, t };
    let c0 = smile_formula(RegimeLabel::CIntermediate, edge, consts)? / consts.sigma0;
    Ok([ba, bc, c0])
}

fn check_boundaries(ctx: &VerifyContext) -> CheckResult {
    let mut parts = Vec::new();
    let mut last = [f64::NAN; 3];
    for &t in &[1e-3, 1e-6, 1e-9] {
        match boundary_ratios(&ctx.consts, t) {
            Ok(r) => {
                parts.push(format!("t={t:e}: B/A {:.5} B/C {:.5} C/sigma0 {:.5}", r[0], r[1], r[2]));
                last = r;
            }
            Err(e) => return failed(12, 0.1, e),
        }
    }
    let worst = last.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    result(12, worst <= 0.1, worst, 0.1, parts.join("; "))
}

fn check_comparator(ctx: &VerifyContext) -> CheckResult {
    let ts = [0.01, 0.05, 0.1, 0.5];
    let kappas = [0.0, 0.05, 0.1, 0.2, 0.4];
    let mut paths = 0usize;
    let mut undominated = 0usize;
    let mut price_violations = 0usize;
    for spec in &ctx.ou_specs {
        for &t in &ts {
            let draws = match ou_comparator_batch(&ctx.params, spec, t, ctx.mc(13, 100_000)) {
                Ok(d) => d,
                Err(e) => return failed(13, 0.0, e),
            };
            paths += draws.len();
            undominated += draws.iter().filter(|d| !d.dominated()).count();
            for &kappa in &kappas {
                let (lo, hi) = ou_price_pair(&draws, kappa);
                if !(lo <= hi) {
                    price_violations += 1;
                }
            }
        }
    }
    let ok = undominated == 0 && price_violations == 0 && ctx.ou_specs.len() >= 3;
    let detail = format!(
        "{} jump laws, {undominated} undominated of {paths} paths, {price_violations} price violations on {} points",
        ctx.ou_specs.len(),
        ctx.ou_specs.len() * ts.len() * kappas.len()
    );
    result(13, ok, (undominated + price_violations) as f64, 0.0, detail)
}

/// Parameters of the published smile figure.
pub fn figure_params() -> crate::Result<ModelParams> {
    ModelParams::from_csf_sigma0(0.3, 0.5, 1.0, 0.1)
}

fn check_figure() -> CheckResult {
    let consts = match figure_params().and_then(|p| derive_constants(&p)) {
        Ok(c) => c,
        Err(e) => return failed(14, 1e-12, e),
    };
    let (d, cap, s0) = (0.3f64, 0.5f64, 0.1f64);
    let th = Thresholds { rule: BoundaryRule::Matched, ..Thresholds::default() };
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for &t in &[1e-2, 1e-3] {
        let m = match matched_boundaries(t, &consts, &th) {
            Ok(m) => m,
            Err(e) => return failed(14, 1e-12, e),
        };
        let lt = (1.0 / t).ln();
        let reps = [
            (RegimeLabel::DTypical, 0.5 * m.kappa_dc),
            (RegimeLabel::CIntermediate, (m.kappa_dc * m.kappa_cb).sqrt()),
            (RegimeLabel::BKappa2Scale, (m.kappa_cb * m.kappa_ba).sqrt()),
            (RegimeLabel::ALargeStrike, 2.0 * m.kappa_ba),
        ];
        for (label, kappa) in reps {
            let q = QueryPoint { kappa, t };
            match classify(q, &consts, &th) {
                Ok(r) if r.label == label => {}
                other => problems.push(format!("t={t} kappa={kappa:.4e} classified {other:?}")),
            }
            let independent = match label {
                RegimeLabel::DTypical => s0,
                RegimeLabel::CIntermediate => {
                    let e = d + 1.0 - kappa.ln() / t.ln();
                    kappa / ((t * lt).sqrt() * (2.0 * e).sqrt())
                }
                RegimeLabel::BKappa2Scale => {
                    let a = kappa / (t.powf(d) * lt.sqrt());
                    let f = f_brute(a, &consts, 100_000).value;
                    kappa / ((t * lt).sqrt() * (2.0 * f).sqrt())
                }
                RegimeLabel::ALargeStrike => {
                    let x = kappa / t;
                    (x / x.ln().sqrt()).powf((0.5 - d) / (1.0 - d)) / (2.0 * cap).sqrt()
                }
            };
            match smile_formula(label, q, &consts) {
                Ok(v) => worst = worst.max(rel(v, independent)),
                Err(e) => problems.push(format!("{label:?}: {e}")),
            }
        }
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.0025).collect();
        let curve = match smile_curve(&grid, t, &consts, &th) {
            Ok(c) => c,
            Err(e) => return failed(14, 1e-12, e),
        };
        let n = curve.len();
        for i in 0..n / 2 {
            if curve[i].value != curve[n - 1 - i].value {
                problems.push(format!("t={t}: asymmetric at kappa={}", curve[i].kappa));
                break;
            }
        }
        if curve[n / 2..].windows(2).any(|w| w[1].value < w[0].value) {
            problems.push(format!("t={t}: curve decreases in |kappa|"));
        }
        if m.fallback {
            problems.push(format!("t={t}: boundary fallback"));
        }
    }
    let ok = worst <= 1e-12 && problems.is_empty();
    let detail = if problems.is_empty() {
        format!("four regimes reproduced at t = 1e-2, 1e-3; worst spot deviation {worst:.3e}")
    } else {
        problems.join("; ")
    };
    result(14, ok, worst, 1e-12, detail)
}

fn check_d_function() -> CheckResult {
    let mut round_trip = 0.0f64;
    for i in 0..=220 {
        let y = 10f64.powf(-8.0 + i as f64 * 11.0 / 220.0);
        round_trip = match d_inverse(y) {
            Ok(z) => round_trip.max(rel(d_function(z), y)),
            Err(_) => f64::INFINITY,
        };
    }
    let seed_gap = |y: f64| d_inverse(y).map(|z| (z / d_inverse_seed(y) - 1.0).abs()).unwrap_or(f64::INFINITY);
    let (small, large) = (seed_gap(1e-8), seed_gap(1e3));
    let ok = round_trip <= 1e-12 && small <= 0.05 && large <= 0.05;
    let detail = format!(
        "round trip {round_trip:.3e} (tol 1e-12); seed gap {small:.4} at y=1e-8, {large:.4} at y=1e3 (tol 0.05)"
    );
    result(15, ok, small.max(large), 0.05, detail)
}
