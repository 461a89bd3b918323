//! Small numerical kernels shared across modules.

/// `(base + step)^p - base^p` without cancellation when `step << base`.
///
/// A zero base degenerates to `step^p`.
pub fn pow_diff(base: f64, step: f64, p: f64) -> f64 {
    if base == 0.0 {
        return step.powf(p);
    }
    base.powf(p) * (p * (step / base).ln_1p()).exp_m1()
}

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection for a sign change of `g` on `[lo, hi]`; `g(lo)` and `g(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol * (1.0 + mid.abs()) {
            return mid;
        }
        let gm = g(mid);
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_diff_matches_naive_when_well_conditioned() {
        let naive = 2.5f64.powf(0.6) - 1.5f64.powf(0.6);
        assert!((pow_diff(1.5, 1.0, 0.6) - naive).abs() < 1e-15);
        assert_eq!(pow_diff(0.0, 2.0, 0.5), 2.0f64.sqrt());
    }

    #[test]
    fn pow_diff_keeps_relative_precision_for_tiny_steps() {
        // d/dx x^p at x = 1e6 times the step
        let got = pow_diff(1e6, 1e-4, 0.6);
        let want = 0.6 * 1e6f64.powf(-0.4) * 1e-4;
        assert!(((got - want) / want).abs() < 1e-9);
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }
}
