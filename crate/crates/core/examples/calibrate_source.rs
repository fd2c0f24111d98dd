//! Fit the cavity source to two spectral landmarks and show what an
//! unreachable target looks like.

use cvbridge::scenario::{ArmEfficiencies, ScenarioConfig, Source, VbsSetting};
use cvbridge::{calibrate_to_landmarks, Landmarks};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::new(Source::fixed(1.0, 1.0)?, VbsSetting::Balance, ArmEfficiencies::default());
    let cal = calibrate_to_landmarks(&Landmarks::default(), &cfg)?;
    println!(
        "x = {:.6}, linewidth = {:.4} MHz, achieved {:.4} dB / {:.4} dB",
        cal.model.pump_x, cal.model.linewidth_mhz, cal.achieved_ref_db, cal.achieved_crossing_db
    );

    let greedy = Landmarks { target_db: -9.0, ..Landmarks::default() };
    match calibrate_to_landmarks(&greedy, &cfg) {
        Ok(_) => println!("unexpectedly feasible"),
        Err(e) => println!("-9 dB: {e}"),
    }
    Ok(())
}
