//! Score every sign assignment on the default calibration battery and show
//! which one the calibration picks.

use supergeom::cli_reports::{calibration_battery, SuiteConfig};
use supergeom::sigma2d::{calibrate_conventions, calibration_table};

fn main() -> supergeom::Result<()> {
    let cfg = SuiteConfig::default();
    let battery = calibration_battery(&cfg);
    let mut table = calibration_table(&battery)?;
    table.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (c, r) in table.iter().take(6) {
        println!(
            "s1 {:+} s2 {:+} s3 {:+} c4 {:+} c5 {:+}  flips {}  residual {r:.3e}",
            c.s1,
            c.s2,
            c.s3,
            c.c4,
            c.c5,
            c.flips()
        );
    }
    let chosen = calibrate_conventions(&battery, cfg.tolerances.calibration)?;
    println!("chosen: {chosen:?}");
    Ok(())
}
