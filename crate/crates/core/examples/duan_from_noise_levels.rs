//! Turn two measured noise levels (dB relative to vacuum) into a Duan value.

use cvbridge::criteria::{from_db, to_db, DuanResult};
use cvbridge::Result;

fn main() -> Result<()> {
    let reference = 2.0;
    for (x_db, p_db) in [(-5.5, 0.0), (-3.0, 0.0), (-3.0, 3.0), (0.0, 0.0)] {
        let vx = from_db(x_db, reference)?;
        let vp = from_db(p_db, reference)?;
        let d = DuanResult::from_variances(vx, vp);
        println!(
            "X-sum {x_db:>5.1} dB, P-diff {p_db:>4.1} dB -> I = {:.4} ({})",
            d.i_value,
            if d.entangled { "entangled" } else { "not certified" }
        );
        assert!((to_db(vx, reference)? - x_db).abs() < 1e-12);
    }
    Ok(())
}
