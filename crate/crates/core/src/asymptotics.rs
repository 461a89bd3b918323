//! Closed-form asymptotics: boundary scales, the profile `f`, regime
//! classification, tail, price and smile asymptotes, large-deviation rates and
//! the price-to-volatility conversion kernel.
//!
//! Every asymptote returns the formula value together with the regime it was
//! evaluated for. Formulas refuse to evaluate outside their guard conditions
//! instead of extrapolating.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{DerivedConstants, QueryPoint};
use crate::numerics::{bisect, pow_diff};
use crate::pricing::{log_normal_sf, normal_pdf, normal_sf};

/// `sqrt(t log(1/t))`.
pub fn bkappa1(t: f64) -> Result<f64> {
    check_small_t(t)?;
    Ok((t * (1.0 / t).ln()).sqrt())
}

/// `t^D sqrt(log(1/t))`.
pub fn bkappa2(t: f64, d: f64) -> Result<f64> {
    check_small_t(t)?;
    Ok(t.powf(d) * (1.0 / t).ln().sqrt())
}

fn check_small_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(domain("t", t, "boundary scales need 0 < t < 1"))
    }
}

/// `f(a)` with its minimizing integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FProfile {
    pub a: f64,
    pub value: f64,
    pub argmin: u64,
}

/// `m + a^2 / (2 c^2 m^{1-2D})`.
#[inline]
pub fn f_term(m: u64, a: f64, consts: &DerivedConstants) -> f64 {
    let m = m as f64;
    m + a * a / (2.0 * consts.c2() * m.powf(1.0 - 2.0 * consts.d()))
}

/// Point `x_k` where the minimizer moves from `k` to `k + 1`.
pub fn f_threshold(k: u64, consts: &DerivedConstants) -> f64 {
    let p = 1.0 - 2.0 * consts.d();
    // k^{-p} - (k+1)^{-p}, computed without cancellation
    let gap = -pow_diff(k as f64, 1.0, -p);
    consts.c_sf / (0.5 * gap).sqrt()
}

/// Explicit minimization: `f = f_k` on `[x_{k-1}, x_k)`.
pub fn f_profile(a: f64, consts: &DerivedConstants) -> Result<FProfile> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain("a", a, "must be positive and finite"));
    }
    let d = consts.d();
    let guess = ((0.5 - d).sqrt() * a / consts.c_sf).powf(1.0 / (1.0 - d));
    let mut k = (guess.floor() as u64).max(1);
    while k > 1 && a < f_threshold(k - 1, consts) {
        k -= 1;
    }
    while a >= f_threshold(k, consts) {
        k += 1;
    }
    // neighbours guard against rounding in the thresholds
    let mut best = FProfile { a, value: f_term(k, a, consts), argmin: k };
    for m in [k.saturating_sub(1), k + 1] {
        if m >= 1 {
            let v = f_term(m, a, consts);
            if v < best.value {
                best = FProfile { a, value: v, argmin: m };
            }
        }
    }
    Ok(best)
}

/// Brute-force minimum over `1..=m_max`, ties to the smaller index.
pub fn f_brute(a: f64, consts: &DerivedConstants, m_max: u64) -> FProfile {
    let mut best = FProfile { a, value: f_term(1, a, consts), argmin: 1 };
    for m in 2..=m_max {
        let v = f_term(m, a, consts);
        if v < best.value {
            best = FProfile { a, value: v, argmin: m };
        }
    }
    best
}

/// Large-`a` growth of `f`: `(1-D)^{(1/2-D)/(1-D)} C a^{1/(1-D)}`.
pub fn f_large_a(a: f64, consts: &DerivedConstants) -> f64 {
    let d = consts.d();
    (1.0 - d).powf((0.5 - d) / (1.0 - d)) * consts.cap_c_sf * a.powf(1.0 / (1.0 - d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    ALargeStrike,
    BKappa2Scale,
    CIntermediate,
    DTypical,
}

impl RegimeLabel {
    pub fn short(&self) -> &'static str {
        match self {
            RegimeLabel::ALargeStrike => "A",
            RegimeLabel::BKappa2Scale => "B",
            RegimeLabel::CIntermediate => "C",
            RegimeLabel::DTypical => "D",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short())
    }
}

/// Which family of boundaries the classification follows.
///
/// The implied-volatility and price results put the lower boundary at
/// `sqrt(2D+1) sigma0 bkappa1(t)`, the tail-probability results at `sqrt(2) sigma0 bkappa1(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Smile,
    Tail,
}

/// Where the switches between neighbouring smile formulas sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryRule {
    /// Multiples `theta_low`, `theta_high` of `bkappa2(t)`.
    Fixed,
    /// Crossing points of neighbouring formulas, falling back to `Fixed` when none exists.
    Matched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub theta_low: f64,
    pub theta_high: f64,
    /// Tail family: typical deviations end at `typical_z sigma0 sqrt(t)`.
    pub typical_z: f64,
    pub rule: BoundaryRule,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { theta_low: 0.5, theta_high: 2.0, typical_z: 3.0, rule: BoundaryRule::Fixed }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_low > 0.0 && self.theta_low < self.theta_high && self.theta_high.is_finite()) {
            return Err(domain("theta_low", self.theta_low, "need 0 < theta_low < theta_high"));
        }
        if !(self.typical_z > 0.0 && self.typical_z.is_finite()) {
            return Err(domain("typical_z", self.typical_z, "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub label: RegimeLabel,
    pub family: Family,
    /// `kappa / bkappa2(t)`, or NaN when `t >= 1`.
    pub ratio: f64,
    /// Within 10% of the B/C switch, where both price formulas are plausible.
    pub near_bc_boundary: bool,
}

/// Lower edge of the intermediate regime for a family.
pub fn typical_edge(family: Family, t: f64, consts: &DerivedConstants) -> Result<f64> {
    let k = match family {
        Family::Smile => (2.0 * consts.d() + 1.0).sqrt(),
        Family::Tail => std::f64::consts::SQRT_2,
    };
    Ok(k * consts.sigma0 * bkappa1(t)?)
}

fn large_time(q: QueryPoint, family: Family) -> Result<Regime> {
    if q.kappa > q.t {
        Ok(Regime { label: RegimeLabel::ALargeStrike, family, ratio: f64::NAN, near_bc_boundary: false })
    } else {
        Err(Error::Guard { regime: "A", requirement: "kappa > t when t >= 1" })
    }
}

/// Implied-volatility and price regimes.
pub fn classify(q: QueryPoint, consts: &DerivedConstants, th: &Thresholds) -> Result<Regime> {
    th.validate()?;
    let q = q.canonical();
    if q.t >= 1.0 {
        return large_time(q, Family::Smile);
    }
    let k = q.kappa;
    let b2 = bkappa2(q.t, consts.d())?;
    let ratio = k / b2;
    let near = (k / (th.theta_low * b2) - 1.0).abs() <= 0.1;
    let (cb, ba) = match th.rule {
        BoundaryRule::Fixed => (th.theta_low * b2, th.theta_high * b2),
        BoundaryRule::Matched => {
            let m = matched_boundaries(q.t, consts, th)?;
            (m.kappa_cb, m.kappa_ba)
        }
    };
    let label = if k <= typical_edge(Family::Smile, q.t, consts)? {
        RegimeLabel::DTypical
    } else if k < cb {
        RegimeLabel::CIntermediate
    } else if k <= ba {
        RegimeLabel::BKappa2Scale
    } else {
        RegimeLabel::ALargeStrike
    };
    Ok(Regime { label, family: Family::Smile, ratio, near_bc_boundary: near })
}

/// Tail-probability regimes.
pub fn classify_tail(q: QueryPoint, consts: &DerivedConstants, th: &Thresholds) -> Result<Regime> {
    th.validate()?;
    let q = q.canonical();
    if q.t >= 1.0 {
        return large_time(q, Family::Tail);
    }
    let k = q.kappa;
    let b2 = bkappa2(q.t, consts.d())?;
    let label = if k <= th.typical_z * consts.sigma0 * q.t.sqrt() {
        RegimeLabel::DTypical
    } else if k <= typical_edge(Family::Tail, q.t, consts)? {
        RegimeLabel::CIntermediate
    } else if k <= th.theta_high * b2 {
        RegimeLabel::BKappa2Scale
    } else {
        RegimeLabel::ALargeStrike
    };
    Ok(Regime { label, family: Family::Tail, ratio: k / b2, near_bc_boundary: false })
}

fn log_kappa_over_t(q: QueryPoint, regime: &'static str) -> Result<f64> {
    if q.kappa > q.t {
        Ok((q.kappa / q.t).ln())
    } else {
        Err(Error::Guard { regime, requirement: "kappa > t so that log(kappa / t) > 0" })
    }
}

/// Evaluate one smile formula regardless of where `q` falls.
pub fn smile_formula(label: RegimeLabel, q: QueryPoint, consts: &DerivedConstants) -> Result<f64> {
    let q = q.canonical();
    let d = consts.d();
    match label {
        RegimeLabel::DTypical => Ok(consts.sigma0),
        RegimeLabel::ALargeStrike => {
            let l = log_kappa_over_t(q, "A")?;
            let base = (q.kappa / q.t) / l.sqrt();
            Ok(base.powf((0.5 - d) / (1.0 - d)) / (2.0 * consts.cap_c_sf).sqrt())
        }
        RegimeLabel::BKappa2Scale => {
            let a = q.kappa / bkappa2(q.t, d)?;
            let f = f_profile(a, consts)?.value;
            Ok(q.kappa / (bkappa1(q.t)? * (2.0 * f).sqrt()))
        }
        RegimeLabel::CIntermediate => {
            let e = anomalous_exponent(q, d)?;
            Ok(q.kappa / (bkappa1(q.t)? * (2.0 * e).sqrt()))
        }
    }
}

/// `D + 1 - log(kappa) / log(t)`.
fn anomalous_exponent(q: QueryPoint, d: f64) -> Result<f64> {
    check_small_t(q.t)?;
    if q.kappa <= 0.0 {
        return Err(Error::Guard { regime: "C", requirement: "kappa > 0" });
    }
    let e = d + 1.0 - q.kappa.ln() / q.t.ln();
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Error::Guard { regime: "C", requirement: "kappa > t^{D+1}" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileAsymptote {
    pub value: f64,
    pub regime: Regime,
}

/// Regime-matched implied-volatility asymptote.
pub fn smile_asymptote(q: QueryPoint, consts: &DerivedConstants, th: &Thresholds) -> Result<SmileAsymptote> {
    let regime = classify(q, consts, th)?;
    Ok(SmileAsymptote { value: smile_formula(regime.label, q, consts)?, regime })
}

/// Switch points used by [`BoundaryRule::Matched`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedBoundaries {
    pub kappa_dc: f64,
    pub kappa_cb: f64,
    pub kappa_ba: f64,
    /// True when a crossing was missing and a fixed band was used instead.
    pub fallback: bool,
}

/// Crossings of C with B and of B with A, scanning `a = kappa / bkappa2(t)` upward.
pub fn matched_boundaries(t: f64, consts: &DerivedConstants, th: &Thresholds) -> Result<MatchedBoundaries> {
    let d = consts.d();
    let b2 = bkappa2(t, d)?;
    let kappa_dc = typical_edge(Family::Smile, t, consts)?;
    let diff = |lhs: RegimeLabel, rhs: RegimeLabel, a: f64| -> Option<f64> {
        let q = QueryPoint { kappa: a * b2, t };
        let l = smile_formula(lhs, q, consts).ok()?;
        let r = smile_formula(rhs, q, consts).ok()?;
        Some(l / r - 1.0)
    };
    let crossing = |lhs, rhs, from: f64, to: f64| -> Option<f64> {
        let n = 600;
        let step = (to / from).ln() / n as f64;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=n {
            let a = from * (step * i as f64).exp();
            let Some(g) = diff(lhs, rhs, a) else {
                prev = None;
                continue;
            };
            if let Some((pa, pg)) = prev {
                if (pg <= 0.0) != (g <= 0.0) {
                    return Some(bisect(|x| diff(lhs, rhs, x).unwrap_or(g), pa, a, 1e-15));
                }
            }
            prev = Some((a, g));
        }
        None
    };
    let a_dc = kappa_dc / b2;
    let mut fallback = false;
    let a_cb = match crossing(RegimeLabel::BKappa2Scale, RegimeLabel::CIntermediate, a_dc.max(1e-6), th.theta_high) {
        Some(a) => a,
        None => {
            fallback = true;
            th.theta_low
        }
    };
    let a_ba = match crossing(RegimeLabel::BKappa2Scale, RegimeLabel::ALargeStrike, a_cb, 1e3) {
        Some(a) => a,
        None => {
            fallback = true;
            th.theta_high.max(a_cb)
        }
    };
    Ok(MatchedBoundaries { kappa_dc, kappa_cb: a_cb * b2, kappa_ba: a_ba * b2, fallback })
}

/// One point on an asymptotic smile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub kappa: f64,
    pub t: f64,
    pub value: f64,
    pub label: RegimeLabel,
}

/// Asymptotic smile over a strike grid at fixed maturity.
pub fn smile_curve(kappas: &[f64], t: f64, consts: &DerivedConstants, th: &Thresholds) -> Result<Vec<SmilePoint>> {
    kappas
        .iter()
        .map(|&kappa| {
            let q = QueryPoint::new(kappa, t)?;
            let s = smile_asymptote(q, consts, th)?;
            Ok(SmilePoint { kappa, t, value: s.value, label: s.regime.label })
        })
        .collect()
}

/// Evaluate one tail formula (log-probability) regardless of where `q` falls.
pub fn tail_formula(label: RegimeLabel, q: QueryPoint, consts: &DerivedConstants) -> Result<f64> {
    let q = q.canonical();
    let d = consts.d();
    match label {
        RegimeLabel::ALargeStrike => Ok(-consts.cap_c_sf * ldp_speed(q, consts)?),
        RegimeLabel::BKappa2Scale => {
            let a = q.kappa / bkappa2(q.t, d)?;
            Ok(-f_profile(a, consts)?.value * (1.0 / q.t).ln())
        }
        RegimeLabel::CIntermediate => {
            let s0 = consts.sigma0;
            Ok(-q.kappa * q.kappa / (2.0 * s0 * s0 * q.t))
        }
        RegimeLabel::DTypical => Ok(log_normal_sf(q.kappa / (q.t.sqrt() * consts.sigma0))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailAsymptote {
    pub log_p: f64,
    pub regime: Regime,
}

/// Regime-matched asymptote of `log P(X_t > kappa)`.
pub fn tail_asymptote(q: QueryPoint, consts: &DerivedConstants, th: &Thresholds) -> Result<TailAsymptote> {
    let regime = classify_tail(q, consts, th)?;
    Ok(TailAsymptote { log_p: tail_formula(regime.label, q, consts)?, regime })
}

/// `log(1 + 1/t) + log(1 + kappa)`.
pub fn g_factor(kappa: f64, t: f64) -> f64 {
    (1.0 / t).ln_1p() + kappa.abs().ln_1p()
}

/// Single formula covering the large-strike and `bkappa2` regimes.
pub fn tail_asymptote_unified(q: QueryPoint, consts: &DerivedConstants) -> Result<f64> {
    let q = q.canonical();
    if q.kappa <= 0.0 {
        return Err(Error::Guard { regime: "unified", requirement: "kappa > 0" });
    }
    let g = g_factor(q.kappa, q.t);
    let a = q.kappa / (q.t.powf(consts.d()) * g.sqrt());
    Ok(-f_profile(a, consts)?.value * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PriceVariant {
    /// `log c ~ log P(X_t > kappa)`.
    A,
    /// `log(c / kappa) ~ log P(X_t > kappa)`.
    B,
    /// Anomalous: `log(c / kappa) ~ -(D + 1 - log kappa / log t) log(1/t)`.
    C,
    /// `c / kappa -> D(a / sigma0)` with `a = kappa / sqrt(t)`.
    D,
    /// `c ~ sigma0 sqrt(t / 2 pi)`.
    E,
}

impl PriceVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PriceVariant::A => "a",
            PriceVariant::B => "b",
            PriceVariant::C => "c",
            PriceVariant::D => "d",
            PriceVariant::E => "e",
        }
    }
}

/// What a price asymptote value measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriceQuantity {
    LogC,
    LogCOverKappa,
    COverKappa,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceAsymptote {
    pub variant: PriceVariant,
    pub quantity: PriceQuantity,
    pub value: f64,
    pub regime: Regime,
    /// The other candidate near the B/C switch, as `(variant, value)`.
    pub alternative: Option<(PriceVariant, f64)>,
}

impl PriceAsymptote {
    /// The implied call price.
    pub fn call(&self, kappa: f64) -> f64 {
        match self.quantity {
            PriceQuantity::LogC => self.value.exp(),
            PriceQuantity::LogCOverKappa => kappa * self.value.exp(),
            PriceQuantity::COverKappa => kappa * self.value,
            PriceQuantity::C => self.value,
        }
    }
}

fn allowed_variants(regime: &Regime, kappa: f64) -> Vec<PriceVariant> {
    use PriceVariant::*;
    let mut v = match regime.label {
        RegimeLabel::ALargeStrike => vec![A, B],
        RegimeLabel::BKappa2Scale => vec![B],
        RegimeLabel::CIntermediate => vec![C],
        RegimeLabel::DTypical => vec![D, E],
    };
    if regime.label == RegimeLabel::BKappa2Scale && kappa >= 1.0 {
        v.push(A);
    }
    if regime.near_bc_boundary {
        for x in [B, C] {
            if !v.contains(&x) {
                v.push(x);
            }
        }
    }
    v
}

fn default_variant(regime: &Regime, kappa: f64) -> PriceVariant {
    match regime.label {
        RegimeLabel::ALargeStrike if kappa >= 1.0 => PriceVariant::A,
        RegimeLabel::ALargeStrike | RegimeLabel::BKappa2Scale => PriceVariant::B,
        RegimeLabel::CIntermediate => PriceVariant::C,
        RegimeLabel::DTypical if kappa > 0.0 => PriceVariant::D,
        RegimeLabel::DTypical => PriceVariant::E,
    }
}

/// Evaluate one price formula without regime checks.
pub fn price_formula(variant: PriceVariant, q: QueryPoint, consts: &DerivedConstants, th: &Thresholds) -> Result<(PriceQuantity, f64)> {
    let q = q.canonical();
    match variant {
        PriceVariant::A => Ok((PriceQuantity::LogC, tail_asymptote(q, consts, th)?.log_p)),
        PriceVariant::B => Ok((PriceQuantity::LogCOverKappa, tail_asymptote(q, consts, th)?.log_p)),
        PriceVariant::C => {
            let e = anomalous_exponent(q, consts.d())?;
            Ok((PriceQuantity::LogCOverKappa, -e * (1.0 / q.t).ln()))
        }
        PriceVariant::D => {
            if q.kappa <= 0.0 {
                return Err(Error::Guard { regime: "D", requirement: "kappa > 0" });
            }
            Ok((PriceQuantity::COverKappa, d_function(q.kappa / (q.t.sqrt() * consts.sigma0))))
        }
        PriceVariant::E => Ok((PriceQuantity::C, consts.sigma0 * (q.t / (2.0 * std::f64::consts::PI)).sqrt())),
    }
}

/// Regime-tagged price asymptote; `requested` overrides the default variant.
pub fn price_asymptote(
    q: QueryPoint,
    consts: &DerivedConstants,
    th: &Thresholds,
    requested: Option<PriceVariant>,
) -> Result<PriceAsymptote> {
    let q = q.canonical();
    let regime = classify(q, consts, th)?;
    let allowed = allowed_variants(&regime, q.kappa);
    let variant = match requested {
        Some(v) if !allowed.contains(&v) => {
            return Err(Error::RegimeMismatch { requested: v.name(), regime: regime.label.short() })
        }
        Some(v) => v,
        None => default_variant(&regime, q.kappa),
    };
    let (quantity, value) = price_formula(variant, q, consts, th)?;
    let alternative = if regime.near_bc_boundary {
        let other = if variant == PriceVariant::C { PriceVariant::B } else { PriceVariant::C };
        price_formula(other, q, consts, th).ok().map(|(_, v)| (other, v))
    } else {
        None
    };
    Ok(PriceAsymptote { variant, quantity, value, regime, alternative })
}

/// `D(z) = phi(z)/z - Phi(-z)`, strictly decreasing on `(0, inf)`.
pub fn d_function(z: f64) -> f64 {
    if z <= 4.0 {
        return normal_pdf(z) / z - normal_sf(z);
    }
    // With the Mills ratio R = 1/(z + g), g = 1/(z + 2/(z + 3/(z + ...))),
    // D = phi (1/z - R) = phi g R / z has no cancellation.
    let mut tail = z;
    for k in (2..=120).rev() {
        tail = z + k as f64 / tail;
    }
    let g = 1.0 / tail;
    normal_pdf(z) * g / (z * (z + g))
}

/// `-D'(z) = phi(z) / z^2`.
fn d_slope(z: f64) -> f64 {
    normal_pdf(z) / (z * z)
}

/// Inverse of [`d_function`] by bracketed Newton on the log scale.
pub fn d_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(domain("y", y, "must be positive and finite"));
    }
    let seed = d_inverse_seed(y);
    let mut lo = seed;
    while d_function(lo) <= y {
        lo *= 0.5;
    }
    let mut hi = seed;
    while d_function(hi) >= y {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NoConvergence { what: "D inverse bracket", iterations: 0 });
        }
    }
    let target = y.ln();
    let mut z = seed.clamp(lo, hi);
    if !(z > lo && z < hi) {
        z = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let dz = d_function(z);
        let g = dz.ln() - target;
        if g == 0.0 {
            return Ok(z);
        }
        // D is decreasing: g > 0 means z is too small
        if g > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let mut next = z + g * dz / d_slope(z);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 2.0 * f64::EPSILON * z || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        z = next;
    }
    Err(Error::NoConvergence { what: "D inverse", iterations: 200 })
}

/// Asymptotic seed: `sqrt(-2 log y)` for small `y`, `1/(sqrt(2 pi) y)` for large `y`.
pub fn d_inverse_seed(y: f64) -> f64 {
    if y < 0.1 {
        (-2.0 * y.ln()).sqrt()
    } else {
        1.0 / ((2.0 * std::f64::consts::PI).sqrt() * y)
    }
}

/// Price-to-volatility conversion formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolConversion {
    /// Strike bounded away from zero.
    LargeStrike,
    /// Same, when `-log c / kappa` is large.
    LargeStrikeSimple,
    /// Strike tending to zero, through `D^{-1}(c / kappa)`.
    SmallStrike,
    /// Small strike with `c / kappa -> 0`.
    SmallStrikeLog,
    /// Small strike with `c / kappa` of order one.
    SmallStrikeFinite,
    /// Small strike with `c / kappa -> inf`, or `kappa = 0`.
    SmallStrikeAtm,
    /// `kappa = 0`.
    AtTheMoney,
}

/// Strikes at or above this level use the large-strike conversion.
pub const LARGE_STRIKE: f64 = 1.0;

/// Apply one conversion to a call price `c` at `q`.
pub fn vol_from_price(kind: VolConversion, q: QueryPoint, c: f64) -> Result<f64> {
    let q = q.canonical();
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::PriceOutOfBounds { price: c, lower: 0.0, kappa: q.kappa });
    }
    let (k, t) = (q.kappa, q.t);
    let need_k = || {
        if k > 0.0 {
            Ok(())
        } else {
            Err(Error::Guard { regime: "conversion", requirement: "kappa > 0" })
        }
    };
    match kind {
        VolConversion::LargeStrike => {
            need_k()?;
            let r = -c.ln() / k;
            Ok(((r + 1.0).sqrt() - r.sqrt()) * (2.0 * k / t).sqrt())
        }
        VolConversion::LargeStrikeSimple => {
            need_k()?;
            Ok(k / (2.0 * t * -c.ln()).sqrt())
        }
        VolConversion::SmallStrike | VolConversion::SmallStrikeFinite => {
            need_k()?;
            Ok(k / (d_inverse(c / k)? * t.sqrt()))
        }
        VolConversion::SmallStrikeLog => {
            need_k()?;
            let l = -(c / k).ln();
            if l <= 0.0 {
                return Err(Error::Guard { regime: "conversion", requirement: "c / kappa < 1" });
            }
            Ok(k / (2.0 * t * l).sqrt())
        }
        VolConversion::SmallStrikeAtm | VolConversion::AtTheMoney => Ok((2.0 * std::f64::consts::PI).sqrt() * c / t.sqrt()),
    }
}

/// Pick the conversion from the strike: at the money, small, or large.
pub fn vol_from_price_asym(q: QueryPoint, c: f64) -> Result<(f64, VolConversion)> {
    let k = q.kappa.abs();
    let kind = if k == 0.0 {
        VolConversion::AtTheMoney
    } else if k >= LARGE_STRIKE {
        VolConversion::LargeStrike
    } else {
        VolConversion::SmallStrike
    };
    Ok((vol_from_price(kind, q, c)?, kind))
}

/// Rate function `C |x|^{1/(1-D)}`.
pub fn ldp_rate(x: f64, consts: &DerivedConstants) -> f64 {
    consts.cap_c_sf * x.abs().powf(1.0 / (1.0 - consts.d()))
}

/// Speed `(kappa/t^D)^{1/(1-D)} (log(kappa/t))^{(1/2-D)/(1-D)}`.
pub fn ldp_speed(q: QueryPoint, consts: &DerivedConstants) -> Result<f64> {
    let q = q.canonical();
    let d = consts.d();
    let l = log_kappa_over_t(q, "A")?;
    Ok((q.kappa / q.t.powf(d)).powf(1.0 / (1.0 - d)) * l.powf((0.5 - d) / (1.0 - d)))
}

/// Asymptote of `log P(I_t > kappa)`.
pub fn it_tail_asymptote(kappa: f64, t: f64, consts: &DerivedConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("t", t, "must be positive"));
    }
    let l = log_kappa_over_t(QueryPoint { kappa, t }, "I_t tail")?;
    let d = consts.d();
    let base = kappa / (consts.c2() * t.powf(2.0 * d));
    Ok(-base.powf(1.0 / (1.0 - 2.0 * d)) * l / (1.0 - 2.0 * d))
}
