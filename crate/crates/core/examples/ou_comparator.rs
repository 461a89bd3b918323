//! The jump-driven mean-reverting comparator on shared shock times: it never
//! accumulates more variance than the model, and larger jumps close the gap.

use shockvol::pricing::ou_price_pair;
use shockvol::rng::SeedSpec;
use shockvol::simulate::{ou_comparator_batch, JumpLaw, McConfig, OuSpec};
use shockvol::ModelParams;

fn main() -> shockvol::Result<()> {
    let params = ModelParams::new(0.3, 1.0, 5.0, -1.0)?;
    let mc = McConfig::new(20_000, SeedSpec::new(4, 0));
    let t = 0.5;
    for size in [0.01, 0.1, 1.0, 10.0, 1e3] {
        let spec = OuSpec::new(JumpLaw::Constant { size });
        let draws = ou_comparator_batch(&params, &spec, t, mc)?;
        let dominated = draws.iter().filter(|d| d.dominated()).count();
        let (c_tilde, c) = ou_price_pair(&draws, 0.1);
        println!("J={size:>7}: dominated {dominated}/{}, call c_tilde={c_tilde:.6} <= c={c:.6}", draws.len());
    }
    Ok(())
}
