//! Monte Carlo implied volatility against the regime asymptote at two maturities.

use shockvol::asymptotics::{smile_asymptote, Thresholds};
use shockvol::pricing::implied_vol_mc;
use shockvol::rng::SeedSpec;
use shockvol::simulate::McConfig;
use shockvol::{derive_constants, ModelParams, QueryPoint};

fn main() -> shockvol::Result<()> {
    let params = ModelParams::new(0.3, 1.0, 5.0, -1.0)?;
    let consts = derive_constants(&params)?;
    let mc = McConfig::new(200_000, SeedSpec::new(1, 0));
    let th = Thresholds::default();
    println!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>6}", "t", "kappa", "iv_mc", "se", "iv_asym", "regime");
    for &t in &[1e-3, 1e-2] {
        for &kappa in &[0.0, 0.02, 0.05, 0.1, 0.2, 0.4] {
            let q = QueryPoint::new(kappa, t)?;
            let iv = implied_vol_mc(&params, q, mc)?.implied_vol;
            let (v, se) = iv.map_or((f64::NAN, f64::NAN), |e| (e.value, e.std_error));
            let a = smile_asymptote(q, &consts, &th)?;
            println!("{t:>8.0e} {kappa:>8.3} {v:>10.5} {se:>10.2e} {:>10.5} {:>6}", a.value, a.regime.label);
        }
    }
    Ok(())
}
