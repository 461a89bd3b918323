//! Black–Scholes primitives, conditional Monte Carlo call prices and implied volatility.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::model::{derive_constants, ModelParams, QueryPoint};
use crate::rng::Estimate;
use crate::simulate::{mean_over_it, McConfig, OuDraw};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal distribution function via `erfc`.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `ln(1 - Phi(x))`, finite far beyond the underflow point of `erfc`.
pub fn log_normal_sf(x: f64) -> f64 {
    if x < 30.0 {
        return normal_sf(x).ln();
    }
    // Mills-ratio series
    let z2 = 1.0 / (x * x);
    let series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
    -0.5 * x * x - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// Intrinsic value `(1 - e^kappa)^+`.
#[inline]
pub fn intrinsic(kappa: f64) -> f64 {
    if kappa < 0.0 {
        -kappa.exp_m1()
    } else {
        0.0
    }
}

/// Total Black–Scholes volatility `v = sigma sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BsTotalVol(f64);

impl BsTotalVol {
    pub fn new(v: f64) -> Result<Self> {
        if v >= 0.0 && !v.is_nan() {
            Ok(Self(v))
        } else {
            Err(crate::error::domain("v", v, "total volatility must be non-negative"))
        }
    }
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Normalized call price (spot 1, zero rate) at log-strike `kappa` and total vol `v`.
///
/// In-the-money strikes go through the put-call symmetry so the time value
/// keeps full relative precision.
pub fn bs_call(kappa: f64, v: f64) -> f64 {
    if kappa < 0.0 {
        -kappa.exp_m1() + kappa.exp() * bs_call_otm(-kappa, v)
    } else {
        bs_call_otm(kappa, v)
    }
}

#[inline]
fn bs_call_otm(kappa: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v.is_infinite() {
        return 1.0;
    }
    let d1 = -kappa / v + 0.5 * v;
    let d2 = d1 - v;
    (normal_cdf(d1) - kappa.exp() * normal_cdf(d2)).max(0.0)
}

/// `d bs_call / dv` at log-strike `kappa`.
pub fn bs_vega(kappa: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    normal_pdf(-kappa / v + 0.5 * v)
}

/// Change in total vol caused by one rounding error in the price.
///
/// Large values mean the price no longer determines the volatility in `f64`.
pub fn total_vol_sensitivity(kappa: f64, v: f64) -> f64 {
    let k = kappa.abs();
    let big_term = normal_cdf(-k / v + 0.5 * v);
    let err = f64::EPSILON * (intrinsic(kappa) + kappa.min(0.0).exp() * big_term);
    let vega = bs_vega(kappa, v);
    if vega > 0.0 {
        err / vega
    } else {
        f64::INFINITY
    }
}

const MAX_ITER: usize = 400;

/// Implied volatility `sigma` with `bs_call(kappa, sigma sqrt(t)) = price`.
pub fn implied_vol(price: f64, q: QueryPoint) -> Result<f64> {
    Ok(implied_total_vol(price, q.kappa)? / q.t.sqrt())
}

/// Total implied volatility for a price at log-strike `kappa`.
pub fn implied_total_vol(price: f64, kappa: f64) -> Result<f64> {
    let lower = intrinsic(kappa);
    if !(price > lower && price < 1.0) {
        return Err(Error::PriceOutOfBounds { price, lower, kappa });
    }
    if kappa < 0.0 {
        // move to the out-of-the-money side
        let tv = (price - lower) * (-kappa).exp();
        if tv <= 0.0 {
            return Err(Error::PriceOutOfBounds { price, lower, kappa });
        }
        solve_otm(tv.min(1.0 - f64::EPSILON), -kappa)
    } else {
        solve_otm(price, kappa)
    }
}

/// Bracketed Newton in `v`; log-price objective for small prices.
fn solve_otm(p: f64, kappa: f64) -> Result<f64> {
    let use_log = p < 0.5;
    let target = if use_log { p.ln() } else { p };
    let objective = |v: f64| {
        let c = bs_call_otm(kappa, v);
        let vega = bs_vega(kappa, v);
        if use_log {
            (c.ln() - target, vega / c)
        } else {
            (c - target, vega)
        }
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while bs_call_otm(kappa, hi) <= p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NoConvergence { what: "implied volatility bracket", iterations: 0 });
        }
    }
    let mut v = seed_guess(p, kappa).clamp(lo, hi);
    if !(v > lo && v < hi) {
        v = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ITER {
        let (g, dg) = objective(v);
        if g == 0.0 {
            return Ok(v);
        }
        if g > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let mut next = v - g / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 2.0 * f64::EPSILON * v || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        v = next;
    }
    Err(Error::NoConvergence { what: "implied volatility", iterations: MAX_ITER })
}

/// Cheap starting point: at the money `v ~ sqrt(2 pi) p`, far out `v ~ sqrt(2 kappa)`-ish.
fn seed_guess(p: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return (2.0 * std::f64::consts::PI).sqrt() * p;
    }
    let l = -p.ln();
    // solve v^2/2 ~ l - kappa/2 + ... crude match of the leading exponent
    (2.0 * (l + kappa).max(1e-300)).sqrt() - (2.0 * l.max(0.0)).sqrt()
}

/// Monte Carlo price with optional implied volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub call: Estimate,
    pub implied_vol: Option<Estimate>,
    pub query: QueryPoint,
    /// The three-standard-error price band reaches the intrinsic bound.
    pub straddles_intrinsic: bool,
}

/// Hull–White conditional estimator: mean of `bs_call(kappa, sqrt(I_t))` over exact draws.
///
/// The `|kappa|` price is estimated and negative strikes are mapped per sample
/// through the symmetry relation, so `kappa` and `-kappa` share draws.
pub fn price_call_mc(params: &ModelParams, q: QueryPoint, mc: McConfig) -> Result<PriceEstimate> {
    let consts = derive_constants(params)?;
    let k = q.kappa.abs();
    let otm = mean_over_it(&consts, q.t, mc, move |i| bs_call_otm(k, i.sqrt()))?;
    let call = if q.kappa < 0.0 {
        let w = q.kappa.exp();
        Estimate { value: intrinsic(q.kappa) + w * otm.value, std_error: w * otm.std_error, ..otm }
    } else {
        otm
    };
    let straddles = otm.value - 3.0 * otm.std_error <= 0.0;
    Ok(PriceEstimate { call, implied_vol: None, query: q, straddles_intrinsic: straddles })
}

/// [`price_call_mc`] followed by inversion; the error is carried by the vega at the solution.
pub fn implied_vol_mc(params: &ModelParams, q: QueryPoint, mc: McConfig) -> Result<PriceEstimate> {
    let mut est = price_call_mc(params, q, mc)?;
    est.implied_vol = Some(implied_vol_of(&est)?);
    Ok(est)
}

/// Implied-vol estimate for an existing price estimate.
pub fn implied_vol_of(est: &PriceEstimate) -> Result<Estimate> {
    let q = est.query;
    let v = implied_total_vol(est.call.value, q.kappa)?;
    let sqrt_t = q.t.sqrt();
    let vega = bs_vega(q.kappa, v);
    let se = if vega > 0.0 { est.call.std_error / (vega * sqrt_t) } else { f64::INFINITY };
    Ok(Estimate { value: v / sqrt_t, std_error: se, ..est.call })
}

/// Comparator and model call prices from the same shared draws, as `(c_tilde, c)`.
///
/// Both are plain ordered means, so pathwise domination carries over to the means.
pub fn ou_price_pair(draws: &[OuDraw], kappa: f64) -> (f64, f64) {
    if draws.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for d in draws {
        lo += bs_call(kappa, d.i_tilde.sqrt());
        hi += bs_call(kappa, d.i.sqrt());
    }
    let n = draws.len() as f64;
    (lo / n, hi / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn normal_basics() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-7);
        for x in [0.1, 0.7, 1.5, 3.0, 6.0] {
            assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-15);
        }
        assert!((normal_pdf(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn log_sf_is_continuous_across_branch() {
        let a = normal_sf(29.999).ln();
        let b = log_normal_sf(30.001);
        assert!(a > b && a - b < 0.07);
        let below = normal_sf(29.9999999).ln();
        let above = log_normal_sf(30.0);
        assert!((below - above).abs() < 1e-5);
        assert!(log_normal_sf(200.0).is_finite());
    }

    #[test]
    fn call_oracles() {
        assert!((bs_call(-0.1, 0.0) - (1.0 - (-0.1f64).exp())).abs() < 1e-16);
        assert!((bs_call(-0.1, 0.0) - 0.0951626).abs() < 1e-7);
        let want = normal_cdf(0.1) - normal_cdf(-0.1);
        assert!((bs_call(0.0, 0.2) - want).abs() < 1e-16);
        assert!((bs_call(0.0, 0.2) - 0.0796557).abs() < 1e-7);
    }

    #[test]
    fn round_trip_grid() {
        for &k in &[-1.5f64, -0.3, 0.0, 0.2, 1.0, 2.0] {
            for &s in &[0.05f64, 0.3, 1.0, 3.0] {
                for &t in &[0.01f64, 0.5, 4.0] {
                    // skip points where one ulp of the price moves sigma by more than 1e-11
                    if total_vol_sensitivity(k, s * t.sqrt()) / t.sqrt() > 1e-11 {
                        continue;
                    }
                    let q = QueryPoint::new(k, t).unwrap();
                    let p = bs_call(k, s * t.sqrt());
                    let got = implied_vol(p, q).unwrap();
                    assert!((got - s).abs() < 1e-10, "k={k} s={s} t={t} got={got}");
                }
            }
        }
    }

    #[test]
    fn near_bounds() {
        let v = implied_total_vol(intrinsic(-0.1) + 1e-15, -0.1).unwrap();
        assert!(v > 0.0 && v < 0.1);
        let hi = implied_total_vol(1.0 - 1e-15, 0.0).unwrap();
        assert!(hi > 10.0);
        assert!((bs_call(0.0, hi) - (1.0 - 1e-15)).abs() < 1e-15);
        assert!(matches!(implied_total_vol(0.0, 0.1), Err(Error::PriceOutOfBounds { .. })));
        assert!(matches!(implied_total_vol(1.0, 0.1), Err(Error::PriceOutOfBounds { .. })));
    }

    #[test]
    fn degenerate_mixture_is_deterministic_price() {
        // V scaled so that c_sf = 1 while the intensity vanishes
        let lam: f64 = 1e-12;
        let v = statrs::function::gamma::gamma(1.6).sqrt() * lam.powf(0.2);
        let p = ModelParams::new(0.3, v, lam, -1.0).unwrap();
        let k = derive_constants(&p).unwrap();
        let i = crate::model::time_change(&k, &crate::model::JumpTimes::empty(0.4), 0.4);
        let q = QueryPoint::new(0.1, 0.4).unwrap();
        let e = implied_vol_mc(&p, q, McConfig::new(100, SeedSpec::new(1, 0))).unwrap();
        assert!((e.call.value - bs_call(0.1, i.sqrt())).abs() < 1e-15);
        assert!((e.implied_vol.unwrap().value - (i / 0.4).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn shared_draw_symmetry() {
        let p = ModelParams::new(0.3, 1.0, 5.0, -1.0).unwrap();
        let mc = McConfig::new(20_000, SeedSpec::new(3, 0));
        let up = implied_vol_mc(&p, QueryPoint::new(0.2, 0.1).unwrap(), mc).unwrap();
        let down = implied_vol_mc(&p, QueryPoint::new(-0.2, 0.1).unwrap(), mc).unwrap();
        let lhs = down.call.value;
        let rhs = 1.0 - (-0.2f64).exp() + (-0.2f64).exp() * up.call.value;
        assert!((lhs - rhs).abs() < 1e-15);
        let (a, b) = (up.implied_vol.unwrap(), down.implied_vol.unwrap());
        assert!((a.value - b.value).abs() < 1e-10);
        assert!((a.std_error - b.std_error).abs() < 1e-10 * a.std_error);
    }
}
