//! Sweep the 532 nm detector phase with the 1550 nm detector locked to the
//! squeezed and then the anti-squeezed quadrature. Writes CSV to stdout.

use std::f64::consts::{FRAC_PI_2, TAU};

use cvbridge::config::{parse_config, EXPERIMENT_DEFAULTS};
use cvbridge::scenario::Arm;
use cvbridge::{phase_scan, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(EXPERIMENT_DEFAULTS)?;
    let grid = Grid::new(0.0, TAU, 73)?;
    for theta in [0.0, FRAC_PI_2] {
        let trace = phase_scan(&cfg.with_phases(theta, 0.0), &grid, Arm::Nm532)?;
        let sum = trace.channel("sum_db").unwrap_or_default();
        let (lo, hi) = sum.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        eprintln!("theta_1550 = {theta:.4}: min {lo:.3} dB, max {hi:.3} dB");
        print!("{}", trace.to_csv_string());
    }
    Ok(())
}
