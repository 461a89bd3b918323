//! Exponential moments of the integrated variance: Monte Carlo, the deterministic
//! series bound, and the ratio of that bound to its leading asymptote.

use shockvol::rng::SeedSpec;
use shockvol::simulate::{exp_moment_mc, exp_moment_series_bound, McConfig, DEFAULT_SERIES_CAP};
use shockvol::verify::series_asymptote_ratio;
use shockvol::{derive_constants, ModelParams};

fn main() -> shockvol::Result<()> {
    let params = ModelParams::new(0.3, 1.0, 0.1, -1.0)?;
    let consts = derive_constants(&params)?;
    let t = 0.1;
    for &b in &[1.0, 10.0] {
        let mc = exp_moment_mc(&params, b, t, McConfig::new(500_000, SeedSpec::new(3, 0)))?;
        let bound = exp_moment_series_bound(&consts, b, t, DEFAULT_SERIES_CAP)?;
        println!(
            "b={b:>5}: log E mc {:.6} (top-1% share {:.3}), log bound {:.6}",
            mc.estimate.value.ln(),
            mc.top_share,
            bound.log_value
        );
    }
    for &b in &[1e2, 1e3, 1e4, 1e5] {
        println!("b={b:>8.0e}: bound / asymptote = {:.5}", series_asymptote_ratio(&consts, b, t)?);
    }
    Ok(())
}
