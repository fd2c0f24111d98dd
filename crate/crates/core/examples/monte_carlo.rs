//! Check the analytic joint variances against sampled ones.

use cvbridge::config::{parse_config, EXPERIMENT_DEFAULTS};
use cvbridge::mc::{analytic_reference, estimate_joint_variances};
use cvbridge::scenario::{build_state, MODE_1550, MODE_532};
use cvbridge::JointCombination;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(EXPERIMENT_DEFAULTS)?.resolved()?;
    let state = build_state(&cfg)?;
    let combos = [
        JointCombination::x_sum(MODE_1550, MODE_532),
        JointCombination::p_diff(MODE_1550, MODE_532),
    ];
    for n in [10_000, 100_000, 1_000_000] {
        for run in estimate_joint_variances(&state, &combos, n, 42)? {
            let exact = analytic_reference(&state, &run.combo)?;
            println!(
                "n = {n:>8}: estimate {:.5} +- {:.5}, exact {:.5}, z = {:+.2}",
                run.estimate,
                run.std_error,
                exact,
                (run.estimate - exact) / run.std_error
            );
        }
    }
    Ok(())
}
