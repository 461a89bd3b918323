//! Exact sampling of shock times, integrated variance and log-prices, plus the
//! Monte Carlo estimators built on them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{derive_constants, time_change_raw, DerivedConstants, JumpTimes, ModelParams, QueryPoint};
use crate::numerics::pow_diff;
use crate::pricing::normal_sf;
use crate::rng::{merge_all, run_chunks, Estimate, Moments, SeedSpec, DEFAULT_CHUNK};

/// Stream tags. Every estimator driven by integrated-variance draws shares
/// `TAG_IT`, so equal seeds give equal draws across estimators.
pub const TAG_JUMPS: u64 = 0x4a55_4d50;
pub const TAG_IT: u64 = 0x4954;
pub const TAG_PATH: u64 = 0x5041_5448;
pub const TAG_OU: u64 = 0x4f55;

/// Chunking and sample-count settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub chunk: usize,
    pub seed: SeedSpec,
}

impl McConfig {
    pub fn new(n: usize, seed: SeedSpec) -> Self {
        Self { n, chunk: DEFAULT_CHUNK, seed }
    }
    pub fn with_chunk(self, chunk: usize) -> Self {
        Self { chunk, ..self }
    }
    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("samples", 0.0, "need at least one sample"));
        }
        Ok(())
    }
}

fn exp_dist(lambda: f64) -> Result<Exp<f64>> {
    Exp::new(lambda).map_err(|_| domain("lambda", lambda, "must be positive"))
}

/// Fill `buf` with the shock times in `(0, horizon]`.
pub fn fill_jump_times(rng: &mut ChaCha8Rng, exp: &Exp<f64>, horizon: f64, buf: &mut Vec<f64>) {
    buf.clear();
    let mut s = 0.0;
    loop {
        s += exp.sample(rng);
        if s > horizon {
            return;
        }
        buf.push(s);
    }
}

pub fn sample_jump_times(lambda: f64, horizon: f64, seed: SeedSpec) -> Result<JumpTimes> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain("horizon", horizon, "must be positive and finite"));
    }
    let exp = exp_dist(lambda)?;
    let mut rng = seed.rng(TAG_JUMPS, 0);
    let mut times = Vec::new();
    fill_jump_times(&mut rng, &exp, horizon, &mut times);
    Ok(JumpTimes { horizon, times })
}

/// Precomputed state for repeated draws of `I_t` at one maturity.
#[derive(Debug, Clone)]
pub struct ItSampler {
    c2: f64,
    two_d: f64,
    age0: f64,
    t: f64,
    exp: Exp<f64>,
}

impl ItSampler {
    pub fn new(consts: &DerivedConstants, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(domain("t", t, "must be positive and finite"));
        }
        Ok(Self {
            c2: consts.c2(),
            two_d: 2.0 * consts.d(),
            age0: -consts.params.tau0,
            t,
            exp: exp_dist(consts.params.lambda)?,
        })
    }

    /// One exact draw of `(I_t, N_t)`.
    ///
    /// Evaluates the same expression as [`crate::model::time_change`] on the same times.
    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, usize) {
        let t = self.t;
        let first = self.exp.sample(rng);
        if first > t {
            return (self.c2 * pow_diff(self.age0, t, self.two_d), 0);
        }
        let mut acc = pow_diff(self.age0, first, self.two_d);
        let mut last = first;
        let mut n = 1;
        loop {
            let next = last + self.exp.sample(rng);
            if next > t {
                acc += (t - last).powf(self.two_d);
                return (self.c2 * acc, n);
            }
            acc += (next - last).powf(self.two_d);
            last = next;
            n += 1;
        }
    }

    /// A draw that also records the shock times.
    pub fn draw_with_times(&self, rng: &mut ChaCha8Rng, buf: &mut Vec<f64>) -> f64 {
        fill_jump_times(rng, &self.exp, self.t, buf);
        time_change_raw(self.c2, self.two_d, self.age0, buf, self.t)
    }
}

/// One exact draw of the integrated variance at `t`.
pub fn sample_it(params: &ModelParams, t: f64, seed: SeedSpec) -> Result<f64> {
    let consts = derive_constants(params)?;
    let sampler = ItSampler::new(&consts, t)?;
    Ok(sampler.draw(&mut seed.rng(TAG_IT, 0)).0)
}

/// `n` draws of `(I_t, N_t)` in sample order.
pub fn sample_it_batch(params: &ModelParams, t: f64, mc: McConfig) -> Result<Vec<(f64, usize)>> {
    mc.check()?;
    let consts = derive_constants(params)?;
    let sampler = ItSampler::new(&consts, t)?;
    let parts = run_chunks(mc.seed, TAG_IT, mc.n, mc.chunk, |rng, _, count| {
        (0..count).map(|_| sampler.draw(rng)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Monte Carlo mean of `g(I_t)` over the shared integrated-variance stream.
pub fn mean_over_it<G>(consts: &DerivedConstants, t: f64, mc: McConfig, g: G) -> Result<Estimate>
where
    G: Fn(f64) -> f64 + Sync,
{
    mc.check()?;
    let sampler = ItSampler::new(consts, t)?;
    let parts = run_chunks(mc.seed, TAG_IT, mc.n, mc.chunk, |rng, _, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(g(sampler.draw(rng).0));
        }
        m
    });
    Ok(Estimate::from_moments(&merge_all(&parts), mc.seed))
}

/// Log-price values on an increasing grid for one path.
pub fn sample_log_price_path(params: &ModelParams, grid: &[f64], seed: SeedSpec) -> Result<Vec<f64>> {
    let consts = derive_constants(params)?;
    let mut prev = 0.0;
    for &g in grid {
        if !(g > prev && g.is_finite()) {
            return Err(domain("grid", g, "must be positive and strictly increasing"));
        }
        prev = g;
    }
    let Some(&horizon) = grid.last() else {
        return Ok(Vec::new());
    };
    let exp = exp_dist(params.lambda)?;
    let mut rng = seed.rng(TAG_PATH, 0);
    let mut times = Vec::new();
    fill_jump_times(&mut rng, &exp, horizon, &mut times);
    let jumps = JumpTimes { horizon, times };
    let mut x = 0.0;
    let mut i_prev = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &g in grid {
        let i_now = crate::model::time_change(&consts, &jumps, g);
        let di = (i_now - i_prev).max(0.0);
        if di > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            x += di.sqrt() * z - 0.5 * di;
        }
        i_prev = i_now;
        out.push(x);
    }
    Ok(out)
}

/// Monte Carlo mean of `h(X_t)` with the Brownian factor sampled explicitly.
pub fn mean_over_log_price<H>(params: &ModelParams, t: f64, mc: McConfig, h: H) -> Result<Estimate>
where
    H: Fn(f64) -> f64 + Sync,
{
    mc.check()?;
    let consts = derive_constants(params)?;
    let sampler = ItSampler::new(&consts, t)?;
    let parts = run_chunks(mc.seed, TAG_PATH, mc.n, mc.chunk, |rng, _, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let i = sampler.draw(rng).0;
            let z: f64 = StandardNormal.sample(rng);
            m.push(h(i.sqrt() * z - 0.5 * i));
        }
        m
    });
    Ok(Estimate::from_moments(&merge_all(&parts), mc.seed))
}

/// Conditional estimator of `P(X_t > kappa)`: the Brownian factor is integrated out exactly.
pub fn estimate_tail(params: &ModelParams, q: QueryPoint, mc: McConfig) -> Result<Estimate> {
    let consts = derive_constants(params)?;
    let k = q.kappa;
    mean_over_it(&consts, q.t, mc, move |i| conditional_tail(k, i))
}

/// `P(X_t > kappa | I_t = i)`.
#[inline]
pub fn conditional_tail(kappa: f64, i: f64) -> f64 {
    let s = i.sqrt();
    if s == 0.0 {
        return if kappa < 0.0 { 1.0 } else { 0.0 };
    }
    normal_sf(kappa / s + 0.5 * s)
}

/// Result of [`exp_moment_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentEstimate {
    pub estimate: Estimate,
    /// Share of the total carried by the largest 1% of samples.
    pub top_share: f64,
    /// Set when that share exceeds one half, i.e. the estimate is unreliable.
    pub heavy_tail: bool,
}

/// Plain Monte Carlo for `E[exp(b I_t)]`.
pub fn exp_moment_mc(params: &ModelParams, b: f64, t: f64, mc: McConfig) -> Result<ExpMomentEstimate> {
    mc.check()?;
    if !b.is_finite() {
        return Err(domain("b", b, "must be finite"));
    }
    let consts = derive_constants(params)?;
    let sampler = ItSampler::new(&consts, t)?;
    let parts = run_chunks(mc.seed, TAG_IT, mc.n, mc.chunk, |rng, _, count| {
        let mut m = Moments::default();
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            let v = (b * sampler.draw(rng).0).exp();
            m.push(v);
            vals.push(v);
        }
        (m, vals)
    });
    let moments = merge_all(parts.iter().map(|p| &p.0));
    let mut all: Vec<f64> = parts.into_iter().flat_map(|p| p.1).collect();
    let total: f64 = all.iter().sum();
    let top = mc.n.div_ceil(100);
    let cut = all.len() - top;
    all.select_nth_unstable_by(cut, |a, b| a.total_cmp(b));
    let top_sum: f64 = all[cut..].iter().sum();
    let top_share = if total > 0.0 { top_sum / total } else { 0.0 };
    Ok(ExpMomentEstimate {
        estimate: Estimate::from_moments(&moments, mc.seed),
        top_share,
        heavy_tail: b != 0.0 && top_share > 0.5,
    })
}

/// Deterministic bound on `E[exp(b I_t)]`, reported on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    pub log_value: f64,
    pub terms: usize,
    pub argmax: usize,
}

pub const DEFAULT_SERIES_CAP: usize = 1_000_000;

/// `exp(sigma0^2 t b) * sum_j exp(f(j))`, truncated once past the peak and
/// below `1e-16` of the largest term.
pub fn exp_moment_series_bound(consts: &DerivedConstants, b: f64, t: f64, cap: usize) -> Result<SeriesBound> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(domain("b", b, "must be positive and finite"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain("t", t, "must be positive and finite"));
    }
    let d = consts.d();
    let lt = consts.params.lambda * t;
    let a = consts.c2() * t.powf(2.0 * d) * b;
    let f = |j: f64| a * j.powf(1.0 - 2.0 * d) - j * ((j / lt).ln() - 1.0);
    let cutoff = 1e-16f64.ln();
    // running log-sum-exp
    let mut peak = 0.0f64;
    let mut sum = 1.0f64;
    let mut argmax = 0usize;
    let mut prev = 0.0f64;
    let mut decreasing = false;
    let mut j = 1usize;
    loop {
        if j > cap {
            if decreasing {
                break;
            }
            return Err(Error::SeriesDivergence { cap });
        }
        let fj = f(j as f64);
        if fj > peak {
            sum = sum * (peak - fj).exp() + 1.0;
            peak = fj;
            argmax = j;
        } else {
            sum += (fj - peak).exp();
        }
        if fj < prev {
            decreasing = true;
            if fj - peak < cutoff {
                break;
            }
        }
        prev = fj;
        j += 1;
    }
    let s0 = consts.sigma0;
    Ok(SeriesBound { log_value: s0 * s0 * t * b + peak + sum.ln(), terms: j + 1, argmax })
}

/// Shock sizes added to the comparator variance at each shock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JumpLaw {
    Constant { size: f64 },
    Exponential { mean: f64 },
    Pareto { scale: f64, shape: f64 },
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        let ok = |name, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(domain(name, x, "must be positive and finite"))
            }
        };
        match *self {
            JumpLaw::Constant { size } => ok("ou jump size", size),
            JumpLaw::Exponential { mean } => ok("ou jump mean", mean),
            JumpLaw::Pareto { scale, shape } => ok("ou pareto scale", scale).and(ok("ou pareto shape", shape)),
        }
    }

    /// Same spelling as the `ou_jumps` configuration key.
    pub fn label(&self) -> String {
        match *self {
            JumpLaw::Constant { size } => format!("constant:{size}"),
            JumpLaw::Exponential { mean } => format!("exponential:{mean}"),
            JumpLaw::Pareto { scale, shape } => format!("pareto:{scale}:{shape}"),
        }
    }
}

/// Comparator specification: jump law and optional starting volatility (defaults to `sigma0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuSpec {
    pub jumps: JumpLaw,
    pub sigma0_tilde: Option<f64>,
}

impl OuSpec {
    pub fn new(jumps: JumpLaw) -> Self {
        Self { jumps, sigma0_tilde: None }
    }
}

/// Shared-draw pair from [`simulate_ou_comparator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuDraw {
    pub i_tilde: f64,
    pub i: f64,
}

impl OuDraw {
    pub fn dominated(&self) -> bool {
        self.i_tilde <= self.i
    }
}

/// Sampler for the comparator. Every solution of `ds2 = -c s2^gamma dt` has
/// the form `2D c_sf^2 (s - theta)^{2D-1}`, so a shock only moves the virtual
/// origin `theta` and each segment integrates in closed form.
#[derive(Debug, Clone)]
pub struct OuSampler {
    base: ItSampler,
    law: JumpLaw,
    age0_tilde: f64,
    k: f64,
}

impl OuSampler {
    pub fn new(consts: &DerivedConstants, spec: &OuSpec, t: f64) -> Result<Self> {
        spec.jumps.validate()?;
        let base = ItSampler::new(consts, t)?;
        let k = 2.0 * consts.d() * consts.c2();
        let age0_tilde = match spec.sigma0_tilde {
            None => base.age0,
            Some(s) if s == consts.sigma0 => base.age0,
            Some(s) => {
                if !(s > 0.0 && s <= consts.sigma0) {
                    return Err(domain("sigma0_tilde", s, "must lie in (0, sigma0] for the comparison to hold"));
                }
                age_for_variance(s * s, k, consts.d())
            }
        };
        Ok(Self { base, law: spec.jumps, age0_tilde, k })
    }

    fn jump_size(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.law {
            JumpLaw::Constant { size } => size,
            JumpLaw::Exponential { mean } => {
                let e: f64 = rng.sample(rand_distr::Exp1);
                mean * e
            }
            JumpLaw::Pareto { scale, shape } => Pareto::new(scale, shape).map(|p| p.sample(rng)).unwrap_or(scale),
        }
    }

    /// Both integrated variances on one shock path. Shock times are drawn
    /// before the sizes, so different laws see identical shock times.
    pub fn draw(&self, rng: &mut ChaCha8Rng, buf: &mut Vec<f64>) -> OuDraw {
        let b = &self.base;
        let t = b.t;
        let p = b.two_d;
        fill_jump_times(rng, &b.exp, t, buf);
        let i = time_change_raw(b.c2, p, b.age0, buf, t);
        let d = 0.5 * p;
        let first_end = buf.first().copied().unwrap_or(t);
        let mut acc = pow_diff(self.age0_tilde, first_end, p);
        let mut age_at_jump = self.age0_tilde + first_end;
        for (idx, &tk) in buf.iter().enumerate() {
            let end = buf.get(idx + 1).copied().unwrap_or(t);
            let var_before = self.k * age_at_jump.powf(p - 1.0);
            let var_after = var_before + self.jump_size(rng);
            let age = age_for_variance(var_after, self.k, d);
            let h = end - tk;
            // the exact value is strictly below h^p; the clamp removes rounding excursions
            acc += pow_diff(age, h, p).min(h.powf(p));
            age_at_jump = age + h;
        }
        OuDraw { i_tilde: b.c2 * acc, i }
    }
}

/// Age `a` with `k a^{2D-1} = var`.
fn age_for_variance(var: f64, k: f64, d: f64) -> f64 {
    (var / k).powf(1.0 / (2.0 * d - 1.0))
}

/// One shared-draw comparator sample.
pub fn simulate_ou_comparator(params: &ModelParams, spec: &OuSpec, t: f64, seed: SeedSpec) -> Result<OuDraw> {
    let consts = derive_constants(params)?;
    let s = OuSampler::new(&consts, spec, t)?;
    Ok(s.draw(&mut seed.rng(TAG_OU, 0), &mut Vec::new()))
}

/// `n` shared-draw comparator samples in sample order.
pub fn ou_comparator_batch(params: &ModelParams, spec: &OuSpec, t: f64, mc: McConfig) -> Result<Vec<OuDraw>> {
    mc.check()?;
    let consts = derive_constants(params)?;
    let s = OuSampler::new(&consts, spec, t)?;
    let parts = run_chunks(mc.seed, TAG_OU, mc.n, mc.chunk, |rng, _, count| {
        let mut buf = Vec::new();
        (0..count).map(|_| s.draw(rng, &mut buf)).collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{it_upper_bound, time_change};

    fn params() -> ModelParams {
        ModelParams::new(0.3, 1.0, 5.0, -1.0).unwrap()
    }

    #[test]
    fn poisson_mean_count() {
        let s = SeedSpec::new(1, 0);
        let exp = exp_dist(2.0).unwrap();
        let parts = run_chunks(s, TAG_JUMPS, 100_000, 4096, |rng, _, count| {
            let mut buf = Vec::new();
            let mut m = Moments::default();
            for _ in 0..count {
                fill_jump_times(rng, &exp, 3.0, &mut buf);
                m.push(buf.len() as f64);
            }
            m
        });
        let e = Estimate::from_moments(&merge_all(&parts), s);
        assert!((e.value - 6.0).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn interarrivals_pass_ks() {
        let s = SeedSpec::new(2, 0);
        let exp = exp_dist(2.0).unwrap();
        let mut rng = s.rng(TAG_JUMPS, 0);
        let mut gaps = Vec::new();
        let mut buf = Vec::new();
        while gaps.len() < 5000 {
            fill_jump_times(&mut rng, &exp, 10.0, &mut buf);
            let mut prev = 0.0;
            for &x in &buf {
                gaps.push(x - prev);
                prev = x;
            }
        }
        gaps.sort_by(|a, b| a.total_cmp(b));
        let n = gaps.len() as f64;
        let stat = gaps
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let f = 1.0 - (-2.0 * g).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value
        assert!(stat < 1.628 / n.sqrt(), "KS statistic {stat}");
    }

    #[test]
    fn tiny_rate_gives_no_jumps() {
        let j = sample_jump_times(1e-12, 1.0, SeedSpec::new(3, 0)).unwrap();
        assert!(j.times.is_empty());
    }

    #[test]
    fn fast_draw_matches_closed_form_on_same_times() {
        let k = derive_constants(&params()).unwrap();
        let s = ItSampler::new(&k, 0.7).unwrap();
        for i in 0..200 {
            let seed = SeedSpec::new(9, i);
            let (fast, n) = s.draw(&mut seed.rng(TAG_IT, 0));
            let mut buf = Vec::new();
            let slow = s.draw_with_times(&mut seed.rng(TAG_IT, 0), &mut buf);
            assert_eq!(fast, slow);
            assert_eq!(n, buf.len());
            let jt = JumpTimes::new(0.7, buf).unwrap();
            assert_eq!(time_change(&k, &jt, 0.7), fast);
            assert!(fast <= it_upper_bound(&k, n, 0.7));
        }
    }

    #[test]
    fn zero_jump_draw_is_deterministic_value() {
        let p = ModelParams::new(0.3, 1.0, 1e-12, -1.0).unwrap();
        let k = derive_constants(&p).unwrap();
        let v = sample_it(&p, 0.5, SeedSpec::new(1, 1)).unwrap();
        assert_eq!(v, time_change(&k, &JumpTimes::empty(0.5), 0.5));
    }

    #[test]
    fn small_time_ratio_near_initial_variance() {
        let p = params();
        let k = derive_constants(&p).unwrap();
        let t = 1e-6;
        let draws = sample_it_batch(&p, t, McConfig::new(10_000, SeedSpec::new(4, 0))).unwrap();
        let close = draws.iter().filter(|(i, _)| *i <= k.sigma0 * k.sigma0 * t * 1.01).count();
        assert!(close as f64 / draws.len() as f64 > 0.99);
    }

    #[test]
    fn path_has_zero_increment_without_variance() {
        let x = sample_log_price_path(&params(), &[0.1, 0.2, 0.5], SeedSpec::new(5, 0)).unwrap();
        assert_eq!(x.len(), 3);
        assert!(sample_log_price_path(&params(), &[0.2, 0.1], SeedSpec::new(5, 0)).is_err());
    }

    #[test]
    fn tail_estimate_is_monotone_and_half_at_money() {
        let p = params();
        let mc = McConfig::new(20_000, SeedSpec::new(6, 0));
        let at = estimate_tail(&p, QueryPoint::new(0.0, 1e-6).unwrap(), mc).unwrap();
        assert!((at.value - 0.5).abs() < 1e-3);
        let mut prev = 1.0;
        for k in [0.0, 0.1, 0.5, 1.0, 3.0] {
            let e = estimate_tail(&p, QueryPoint::new(k, 0.2).unwrap(), mc).unwrap();
            assert!(e.value < prev);
            prev = e.value;
        }
    }

    #[test]
    fn exp_moment_at_zero_is_one() {
        let e = exp_moment_mc(&params(), 0.0, 0.5, McConfig::new(1000, SeedSpec::new(7, 0))).unwrap();
        assert_eq!(e.estimate.value, 1.0);
        assert_eq!(e.estimate.std_error, 0.0);
        assert!(!e.heavy_tail);
    }

    #[test]
    fn series_bound_dominates_mc() {
        let p = params();
        let k = derive_constants(&p).unwrap();
        for &(b, t) in &[(0.5, 0.1), (2.0, 0.1), (1.0, 0.5), (5.0, 0.05)] {
            let bound = exp_moment_series_bound(&k, b, t, DEFAULT_SERIES_CAP).unwrap();
            let mc = exp_moment_mc(&p, b, t, McConfig::new(50_000, SeedSpec::new(8, 0))).unwrap();
            let e = mc.estimate;
            assert!(bound.log_value >= (e.value - 3.0 * e.std_error).ln(), "b={b} t={t}");
        }
    }

    #[test]
    fn series_bound_small_b_at_least_one() {
        let k = derive_constants(&params()).unwrap();
        let bound = exp_moment_series_bound(&k, 1e-9, 0.1, DEFAULT_SERIES_CAP).unwrap();
        assert!(bound.log_value >= 0.0);
    }

    #[test]
    fn series_divergence_guard() {
        let k = derive_constants(&params()).unwrap();
        assert!(matches!(exp_moment_series_bound(&k, 1e6, 1.0, 3), Err(Error::SeriesDivergence { cap: 3 })));
    }

    #[test]
    fn ou_without_jumps_matches_exactly() {
        let p = ModelParams::new(0.3, 1.0, 1e-12, -1.0).unwrap();
        let spec = OuSpec::new(JumpLaw::Constant { size: 1.0 });
        let d = simulate_ou_comparator(&p, &spec, 0.8, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(d.i_tilde, d.i);
    }

    #[test]
    fn ou_increases_with_jump_size() {
        let p = params();
        let mc = McConfig::new(2000, SeedSpec::new(2, 0));
        let mut prev: Option<Vec<OuDraw>> = None;
        for j in [0.01, 0.1, 1.0, 10.0, 1e3, 1e6] {
            let spec = OuSpec::new(JumpLaw::Constant { size: j });
            let cur = ou_comparator_batch(&p, &spec, 1.0, mc).unwrap();
            assert!(cur.iter().all(|d| d.dominated()));
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&cur) {
                    assert_eq!(a.i, b.i);
                    assert!(a.i_tilde <= b.i_tilde);
                }
            }
            prev = Some(cur);
        }
        let last = prev.unwrap();
        let gap = last.iter().map(|d| (d.i - d.i_tilde) / d.i).fold(0.0, f64::max);
        assert!(gap < 1e-3, "gap {gap}");
    }
}
