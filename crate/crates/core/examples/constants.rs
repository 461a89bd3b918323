//! Derived constants for the default model and for the smile-figure configuration.

use shockvol::verify::figure_params;
use shockvol::{derive_constants, ModelParams};

fn main() -> shockvol::Result<()> {
    for (label, params) in [("default", ModelParams::new(0.3, 1.0, 5.0, -1.0)?), ("figure", figure_params()?)] {
        let k = derive_constants(&params)?;
        println!("{label}: D={} V={:.6} lambda={} tau0={:.6e}", params.d, params.v, params.lambda, params.tau0);
        println!("  c_sf={:.12} sigma0={:.12} C_sf={:.12} C_tilde={:.12}", k.c_sf, k.sigma0, k.cap_c_sf, k.c_tilde);
        println!("  comparator: c={:.6} gamma={:.6}", k.ou_c, k.ou_gamma);
    }
    Ok(())
}
