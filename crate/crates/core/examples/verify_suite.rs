//! Run the acceptance suite on the default model and print one line per check.

use shockvol::config::RunConfig;
use shockvol::verify::{run_suite_timed, VerifyContext};

fn main() -> shockvol::Result<()> {
    let ctx = VerifyContext::from_config(&RunConfig::default())?;
    let (report, secs) = run_suite_timed(&ctx);
    for (c, s) in report.checks.iter().zip(secs) {
        println!("{:>2} {} {:<36} {:>7.2}s  {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name, s, c.detail);
    }
    println!("overall: {}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(())
}
