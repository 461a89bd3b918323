//! The kernel D(z) = phi(z)/z - Phi(-z), its inverse, and the asymptotic seeds.

use shockvol::asymptotics::{d_function, d_inverse, d_inverse_seed};

fn main() -> shockvol::Result<()> {
    println!("{:>10} {:>14} {:>14} {:>10}", "y", "D^-1(y)", "seed", "ratio");
    for e in [-100, -50, -12, -8, -4, -1, 0, 1, 3] {
        let y = 10f64.powi(e);
        let z = d_inverse(y)?;
        assert!(((d_function(z) - y) / y).abs() < 1e-12);
        let s = d_inverse_seed(y);
        println!("{y:>10.0e} {z:>14.8} {s:>14.8} {:>10.5}", z / s);
    }
    Ok(())
}
