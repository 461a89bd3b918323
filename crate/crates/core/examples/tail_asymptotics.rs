//! Conditional Monte Carlo tail probabilities against the regime and unified asymptotes.

use shockvol::asymptotics::{tail_asymptote, tail_asymptote_unified, Thresholds};
use shockvol::rng::SeedSpec;
use shockvol::simulate::{estimate_tail, McConfig};
use shockvol::{derive_constants, ModelParams, QueryPoint};

fn main() -> shockvol::Result<()> {
    let params = ModelParams::new(0.3, 1.0, 5.0, -1.0)?;
    let consts = derive_constants(&params)?;
    let mc = McConfig::new(1_000_000, SeedSpec::new(2, 0));
    let th = Thresholds::default();
    println!("{:>6} {:>6} {:>12} {:>12} {:>12} {:>6}", "t", "kappa", "log p mc", "regime fml", "unified", "regime");
    for &t in &[0.5, 0.1, 0.02] {
        for &kappa in &[0.1, 0.5, 1.0] {
            let q = QueryPoint::new(kappa, t)?;
            let p = estimate_tail(&params, q, mc)?;
            let a = tail_asymptote(q, &consts, &th)?;
            let u = tail_asymptote_unified(q, &consts)?;
            println!("{t:>6} {kappa:>6} {:>12.5} {:>12.5} {u:>12.5} {:>6}", p.value.ln(), a.log_p, a.regime.label);
        }
    }
    Ok(())
}
