//! Compare the balanced splitter with the one that minimises I, for a few
//! anti-squeezing levels.

use cvbridge::scenario::{optimize_vbs, ArmEfficiencies, ScenarioConfig, Source, VbsSetting};
use cvbridge::Result;

fn main() -> Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "V+", "t_bal", "I_bal", "t_opt", "I_opt");
    for v_plus in [7.0, 15.0, 30.0, 100.0] {
        let cfg = ScenarioConfig::new(
            Source::fixed(0.15, v_plus)?,
            VbsSetting::Optimize,
            ArmEfficiencies::default(),
        );
        let out = optimize_vbs(&cfg)?;
        println!(
            "{v_plus:>6.1} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            out.t_balance, out.i_balance, out.point.t, out.point.duan.i_value
        );
    }
    Ok(())
}
