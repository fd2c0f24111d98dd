//! Build a two-mode squeezed state by hand (correlated in X1 + X2 and
//! P1 - P2) and watch the Duan quantity as
//! loss is added to one arm.

use cvbridge::gaussian::{GaussianState, LossChannel};
use cvbridge::{duan, Result};

fn main() -> Result<()> {
    let r = 0.8;
    let epr = GaussianState::vacuum(2)?
        .squeeze(0, r, std::f64::consts::FRAC_PI_2)?
        .squeeze(1, r, 0.0)?
        .beamsplitter(0, 1, std::f64::consts::FRAC_1_SQRT_2)?;

    println!("symplectic eigenvalues: {:?}", epr.symplectic_eigenvalues());
    println!("{:>6}  {:>10}  {:>10}", "eta", "I", "entangled");
    for eta in [1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0] {
        let lossy = epr.attenuate(&LossChannel::new(1, eta)?)?;
        let d = duan(&lossy, 0, 1)?;
        println!("{eta:>6.2}  {:>10.6}  {:>10}", d.i_value, d.entangled);
    }
    Ok(())
}
