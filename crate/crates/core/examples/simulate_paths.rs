//! One log-price path, its shock times and the integrated variance on a grid.

use shockvol::model::{spot_volatility, time_change};
use shockvol::rng::SeedSpec;
use shockvol::simulate::{sample_jump_times, sample_log_price_path};
use shockvol::{derive_constants, ModelParams};

fn main() -> shockvol::Result<()> {
    let params = ModelParams::new(0.3, 1.0, 5.0, -1.0)?;
    let consts = derive_constants(&params)?;
    let seed = SeedSpec::new(42, 0);
    let grid: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();

    let jumps = sample_jump_times(params.lambda, 1.0, seed)?;
    println!("shock times: {:?}", jumps.times);
    let path = sample_log_price_path(&params, &grid, seed)?;
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "I_t", "sigma_t", "X_t");
    for (t, x) in grid.iter().zip(&path) {
        println!("{t:>5.2} {:>12.6} {:>12.6} {x:>12.6}", time_change(&consts, &jumps, *t), spot_volatility(&consts, &jumps, *t));
    }
    Ok(())
}
