//! Evaluate the built-in experiment and print points A to D.

use cvbridge::config::{parse_config, EXPERIMENT_DEFAULTS};
use cvbridge::criteria::NoiseLevel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config(EXPERIMENT_DEFAULTS)?;
    let op = cvbridge::evaluate(&cfg)?;
    println!("t = {:.6}, r = {:.6}", op.t, op.r);
    println!("V- = {:.5}, V+ = {:.5} at {} MHz", op.v_minus, op.v_plus, op.analysis_freq_mhz);
    let rows: [(&str, &NoiseLevel); 4] = [
        ("A  X1550 + X532", &op.points.a),
        ("B  X1550 - X532", &op.points.b),
        ("C  P1550 + P532", &op.points.c),
        ("D  P1550 - P532", &op.points.d),
    ];
    for (label, level) in rows {
        println!("{label}: {:>8.3} dB", level.rel_db);
    }
    println!("I = {:.4}, entangled = {}", op.duan.i_value, op.duan.entangled);
    Ok(())
}
