//! Run a suite from code and print its report.
//!
//! `cargo run --example verify_report -- currents`

use supergeom::cli_reports::{run_suite, Suite, SuiteConfig};

fn main() -> supergeom::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("algebra").parse()?;
    let report = run_suite(&SuiteConfig::default(), suite, false)?;
    for c in &report.checks {
        println!(
            "{:<40} {:>10.3e} <= {:<8.0e} {}",
            c.name,
            c.residual,
            c.tolerance,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
