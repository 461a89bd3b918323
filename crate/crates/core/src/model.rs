//! Model parameters, derived constants and the exact path functionals.

use serde::{Deserialize, Serialize};
use libm::tgamma as gamma;

use crate::error::{domain, Result};
use crate::numerics::{adaptive_simpson, pow_diff};

/// The four primitive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Roughness exponent, strictly inside (0, 1/2).
    pub d: f64,
    /// Large-time volatility.
    pub v: f64,
    /// Shock intensity.
    pub lambda: f64,
    /// Virtual time of the last shock before zero, strictly negative.
    pub tau0: f64,
}

impl ModelParams {
    pub fn new(d: f64, v: f64, lambda: f64, tau0: f64) -> Result<Self> {
        let p = Self { d, v, lambda, tau0 };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`ModelParams::new`] with the initial volatility in place of `tau0`.
    pub fn from_sigma0(d: f64, v: f64, lambda: f64, sigma0: f64) -> Result<Self> {
        let tau0 = sigma0_to_tau0(sigma0, d, v, lambda)?;
        Self::new(d, v, lambda, tau0)
    }

    /// Parameterize by the tail constant `C_sf` instead of `V`.
    pub fn from_csf_sigma0(d: f64, c_sf_tail: f64, lambda: f64, sigma0: f64) -> Result<Self> {
        check_d(d)?;
        if !(c_sf_tail > 0.0 && c_sf_tail.is_finite()) {
            return Err(domain("C_sf", c_sf_tail, "must be positive and finite"));
        }
        let scale = (csf_prefactor(d) / c_sf_tail).powf(1.0 - d);
        let v = scale_to_v(scale, d, lambda)?;
        Self::from_sigma0(d, v, lambda, sigma0)
    }

    pub fn validate(&self) -> Result<()> {
        check_d(self.d)?;
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(domain("V", self.v, "must be positive and finite"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(domain("lambda", self.lambda, "must be positive and finite"));
        }
        if !(self.tau0 < 0.0 && self.tau0.is_finite()) {
            return Err(domain("tau0", self.tau0, "must be negative and finite"));
        }
        Ok(())
    }
}

fn check_d(d: f64) -> Result<()> {
    if d > 0.0 && d < 0.5 {
        Ok(())
    } else {
        Err(domain("D", d, "must lie strictly between 0 and 1/2"))
    }
}

fn csf_prefactor(d: f64) -> f64 {
    (1.0 - d).powf(0.5 / (1.0 - d)) / (0.5 - d).powf((0.5 - d) / (1.0 - d))
}

fn v_to_scale(v: f64, d: f64, lambda: f64) -> f64 {
    lambda.powf(d - 0.5) * v / gamma(2.0 * d + 1.0).sqrt()
}

fn scale_to_v(scale: f64, d: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("lambda", lambda, "must be positive and finite"));
    }
    Ok(scale * gamma(2.0 * d + 1.0).sqrt() * lambda.powf(0.5 - d))
}

/// Closed-form constants computed once per parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub params: ModelParams,
    /// Volatility scale `c`.
    pub c_sf: f64,
    pub sigma0: f64,
    /// Tail constant `C`.
    pub cap_c_sf: f64,
    /// Exponential-moment constant.
    pub c_tilde: f64,
    pub ou_c: f64,
    pub ou_gamma: f64,
}

impl DerivedConstants {
    pub fn d(&self) -> f64 {
        self.params.d
    }
    pub fn c2(&self) -> f64 {
        self.c_sf * self.c_sf
    }
}

pub fn derive_constants(params: &ModelParams) -> Result<DerivedConstants> {
    params.validate()?;
    let d = params.d;
    let c = v_to_scale(params.v, d, params.lambda);
    let sigma0 = c * (2.0 * d).sqrt() * (-params.tau0).powf(d - 0.5);
    let cap_c_sf = csf_prefactor(d) * c.powf(-1.0 / (1.0 - d));
    let c_tilde = c.powf(1.0 / d)
        * (2.0 * d).powf(1.0 / (2.0 * d))
        * (1.0 - 2.0 * d).powf((1.0 - 2.0 * d) / (2.0 * d));
    let ou_c = (1.0 - 2.0 * d) / (2.0 * d * c * c).powf(1.0 / (1.0 - 2.0 * d));
    let ou_gamma = (2.0 - 2.0 * d) / (1.0 - 2.0 * d);
    Ok(DerivedConstants {
        params: *params,
        c_sf: c,
        sigma0,
        cap_c_sf,
        c_tilde,
        ou_c,
        ou_gamma,
    })
}

/// Inverts the initial-volatility relation for `tau0`.
pub fn sigma0_to_tau0(sigma0: f64, d: f64, v: f64, lambda: f64) -> Result<f64> {
    check_d(d)?;
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(domain("sigma0", sigma0, "must be positive and finite"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(domain("V", v, "must be positive and finite"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("lambda", lambda, "must be positive and finite"));
    }
    let k = v_to_scale(v, d, lambda) * (2.0 * d).sqrt();
    Ok(-(sigma0 / k).powf(1.0 / (d - 0.5)))
}

/// Ordered shock times on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpTimes {
    pub horizon: f64,
    pub times: Vec<f64>,
}

impl JumpTimes {
    pub fn new(horizon: f64, times: Vec<f64>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain("horizon", horizon, "must be positive and finite"));
        }
        let mut prev = 0.0;
        for &s in &times {
            if !(s > prev && s <= horizon) {
                return Err(domain("jump time", s, "times must increase strictly inside (0, horizon]"));
            }
            prev = s;
        }
        Ok(Self { horizon, times })
    }

    pub fn empty(horizon: f64) -> Self {
        Self { horizon, times: Vec::new() }
    }

    /// Number of shocks in `(0, t]`.
    pub fn count_until(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }
}

/// A log-strike and maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPoint {
    pub kappa: f64,
    pub t: f64,
}

impl QueryPoint {
    pub fn new(kappa: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain("t", t, "maturity must be positive and finite"));
        }
        if !kappa.is_finite() {
            return Err(domain("kappa", kappa, "must be finite"));
        }
        Ok(Self { kappa, t })
    }

    /// The non-negative representative under the strike symmetry.
    pub fn canonical(&self) -> Self {
        Self { kappa: self.kappa.abs(), t: self.t }
    }
}

/// Spot volatility at `t`; `+inf` exactly at a shock.
pub fn spot_volatility(consts: &DerivedConstants, jumps: &JumpTimes, t: f64) -> f64 {
    let n = jumps.count_until(t);
    let last = if n == 0 { consts.params.tau0 } else { jumps.times[n - 1] };
    let age = t - last;
    if age <= 0.0 {
        return f64::INFINITY;
    }
    let d = consts.d();
    consts.c_sf * (2.0 * d).sqrt() * age.powf(d - 0.5)
}

/// Integrated variance `I_t` for a path given by `jumps`.
pub fn time_change(consts: &DerivedConstants, jumps: &JumpTimes, t: f64) -> f64 {
    let n = jumps.count_until(t);
    time_change_raw(consts.c2(), 2.0 * consts.d(), -consts.params.tau0, &jumps.times[..n], t)
}

/// Core evaluator: `times` must be the sorted shocks in `(0, t]`.
pub(crate) fn time_change_raw(c2: f64, two_d: f64, age0: f64, times: &[f64], t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let first_end = times.first().copied().unwrap_or(t);
    let mut acc = pow_diff(age0, first_end, two_d);
    for w in times.windows(2) {
        acc += (w[1] - w[0]).powf(two_d);
    }
    if let Some(&last) = times.last() {
        acc += (t - last).powf(two_d);
    }
    c2 * acc
}

/// Pathwise upper bound on `I_t` given `n` shocks in `(0, t]`.
pub fn it_upper_bound(consts: &DerivedConstants, n: usize, t: f64) -> f64 {
    let d = consts.d();
    let s0 = consts.sigma0;
    let jump_part = if n == 0 {
        0.0
    } else {
        consts.c2() * (n as f64).powf(1.0 - 2.0 * d) * t.powf(2.0 * d)
    };
    s0 * s0 * t + jump_part
}

/// `E[sigma_t^2]` from the law of the time since the last shock.
pub fn mean_sigma_squared(consts: &DerivedConstants, t: f64) -> f64 {
    let p = &consts.params;
    let d = p.d;
    let lam = p.lambda;
    let c2 = consts.c2();
    let residual = 2.0 * d * c2 * (t - p.tau0).powf(2.0 * d - 1.0) * (-lam * t).exp();
    if t <= 0.0 {
        return residual;
    }
    // u = y^{2D} turns the weakly singular integrand into a smooth one.
    let inv = 1.0 / (2.0 * d);
    let cutoff = (760.0 / lam).powf(2.0 * d);
    let upper = t.powf(2.0 * d).min(cutoff);
    let integral = adaptive_simpson(|u| (-lam * u.powf(inv)).exp(), 0.0, upper, 1e-12 / (c2 * lam).max(1.0));
    c2 * lam * integral + residual
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_scale(d: f64) -> DerivedConstants {
        // V chosen so that c_sf = 1 with lambda = 1.
        let v = gamma(2.0 * d + 1.0).sqrt();
        derive_constants(&ModelParams::new(d, v, 1.0, -1.0).unwrap()).unwrap()
    }

    #[test]
    fn scale_at_quarter() {
        let k = derive_constants(&ModelParams::new(0.25, 1.0, 1.0, -1.0).unwrap()).unwrap();
        assert!((k.c_sf - 1.0 / gamma(1.5).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brownian_limit() {
        let k = derive_constants(&ModelParams::new(0.499999, 1.0, 1.0, -1.0).unwrap()).unwrap();
        assert!((k.sigma0 - 1.0).abs() < 1e-5);
        assert!((k.c_sf - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(0.6, 1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.3, 0.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.3, 1.0, -1.0, -1.0).is_err());
        assert!(ModelParams::new(0.3, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sigma0_round_trip() {
        let p = ModelParams::new(0.25, 1.0, 1.0, -1.0).unwrap();
        let s0 = derive_constants(&p).unwrap().sigma0;
        let tau0 = sigma0_to_tau0(s0, 0.25, 1.0, 1.0).unwrap();
        assert!((tau0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn figure_configuration() {
        let p = ModelParams::from_csf_sigma0(0.3, 0.5, 1.0, 0.1).unwrap();
        let k = derive_constants(&p).unwrap();
        assert!(p.tau0 < 0.0);
        assert!((k.cap_c_sf - 0.5).abs() < 1e-12);
        assert!((k.sigma0 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn csf_matches_large_a_asymptote_of_f() {
        // f(a) ~ (1-D)^{(1/2-D)/(1-D)} C a^{1/(1-D)}; continuous minimum is exact asymptotically.
        let k = derive_constants(&ModelParams::new(0.3, 1.0, 2.0, -0.5).unwrap()).unwrap();
        let d = 0.3;
        let a: f64 = 1e6;
        let c2 = k.c2();
        let mstar = ((0.5 - d) * a * a / c2).powf(1.0 / (2.0 - 2.0 * d));
        let fcont = mstar + a * a / (2.0 * c2 * mstar.powf(1.0 - 2.0 * d));
        let pred = (1.0 - d).powf((0.5 - d) / (1.0 - d)) * k.cap_c_sf * a.powf(1.0 / (1.0 - d));
        assert!((fcont / pred - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ou_pair() {
        let k = unit_scale(0.25);
        assert!((k.ou_gamma - 3.0).abs() < 1e-15);
        assert!((k.ou_c - 0.5 / 0.5f64.powf(2.0)).abs() < 1e-12);
    }

    #[test]
    fn time_change_oracles() {
        let k = unit_scale(0.25);
        let none = JumpTimes::empty(1.0);
        assert_eq!(time_change(&k, &none, 0.0), 0.0);
        assert!((time_change(&k, &none, 1.0) - 0.414213562373095).abs() < 1e-6);
        let one = JumpTimes::new(1.0, vec![0.5]).unwrap();
        let want = 1.5f64.sqrt() - 1.0 + 0.5f64.sqrt();
        assert!((time_change(&k, &one, 1.0) - want).abs() < 1e-14);
        // the commonly quoted 0.931677 is a rounding slip; the exact value is 0.93185...
        assert!((want - 0.931851652578).abs() < 1e-9);
    }

    #[test]
    fn spot_volatility_cases() {
        let k = unit_scale(0.25);
        let jumps = JumpTimes::new(2.0, vec![0.5, 1.2]).unwrap();
        assert!((spot_volatility(&k, &jumps, 0.0) - k.sigma0).abs() < 1e-15);
        assert!(spot_volatility(&k, &jumps, 0.5).is_infinite());
        let want = (0.5f64).sqrt() * 0.3f64.powf(-0.25);
        assert!((spot_volatility(&k, &jumps, 0.8) - want).abs() < 1e-14);
    }

    #[test]
    fn spot_variance_integrates_to_time_change() {
        let k = derive_constants(&ModelParams::new(0.3, 0.8, 3.0, -0.7).unwrap()).unwrap();
        let jumps = JumpTimes::new(1.0, vec![0.2, 0.55, 0.9]).unwrap();
        let t = 1.0;
        let d = k.d();
        let mut knots = vec![0.0];
        knots.extend_from_slice(&jumps.times);
        knots.push(t);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let origin = if w[0] == 0.0 { k.params.tau0 } else { w[0] };
            // s = origin + x^{1/D} makes the integrand linear in x; open midpoint rule avoids the poles
            let lo = (w[0] - origin).powf(d);
            let hi = (w[1] - origin).powf(d);
            let n = 4000;
            let h = (hi - lo) / n as f64;
            for i in 0..n {
                let x = lo + (i as f64 + 0.5) * h;
                let s = origin + x.powf(1.0 / d);
                let sig = spot_volatility(&k, &jumps, s);
                total += sig * sig * x.powf(1.0 / d - 1.0) / d * h;
            }
        }
        assert!((total - time_change(&k, &jumps, t)).abs() < 1e-8);
    }

    #[test]
    fn upper_bound_basics() {
        let k = unit_scale(0.3);
        assert_eq!(it_upper_bound(&k, 0, 0.0), 0.0);
        assert!((it_upper_bound(&k, 0, 2.0) - k.sigma0 * k.sigma0 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn mean_spot_variance_limits() {
        let p = ModelParams::new(0.3, 1.3, 2.0, -0.4).unwrap();
        let k = derive_constants(&p).unwrap();
        assert!((mean_sigma_squared(&k, 0.0) - k.sigma0 * k.sigma0).abs() < 1e-14);
        assert!((mean_sigma_squared(&k, 500.0) / (1.3 * 1.3) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mean_spot_variance_matches_incomplete_gamma() {
        use statrs::function::gamma::gamma_lr;
        let p = ModelParams::new(0.3, 1.0, 5.0, -1.0).unwrap();
        let k = derive_constants(&p).unwrap();
        for &t in &[0.01, 0.3, 1.0, 4.0] {
            let lam: f64 = 5.0;
            let a = 2.0 * 0.3;
            let trunc = lam.powf(1.0 - a) * gamma(a) * gamma_lr(a, lam * t);
            let want = a * k.c2() * (trunc + (t + 1.0f64).powf(a - 1.0) * (-lam * t).exp());
            assert!((mean_sigma_squared(&k, t) - want).abs() < 1e-9, "t={t}");
        }
    }
}
