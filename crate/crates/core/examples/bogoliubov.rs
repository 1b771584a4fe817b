//! Bogoliubov rotation of a doubled truncated Fock space: the transformed
//! ladder operators keep their commutators away from the cutoff, and two
//! rotations compose into one.

use thermofield::fock::FockSpace;
use thermofield::hopf::{bogoliubov, ccr_residuals, DeformationParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = FockSpace::doubled(12)?;
    for theta in [0.0, 0.4, -1.1, 1.8] {
        let pair = bogoliubov(theta, space)?;
        let [aa, tt, a_t, a_tdag] = ccr_residuals(&pair)?;
        let q = DeformationParam::from_theta(theta)?.q();
        println!(
            "theta={theta:+.2} q={q:.4}  [A,A+]-1={aa:.1e} [A~,A~+]-1={tt:.1e} [A,A~]={a_t:.1e} [A,A~+]={a_tdag:.1e}"
        );
    }

    let two_steps = bogoliubov(0.3, space)?.then(0.5)?;
    let one_step = bogoliubov(0.8, space)?;
    let diff = two_steps.a_theta.max_abs_diff(&one_step.a_theta)?;
    println!("T(0.5) T(0.3) vs T(0.8): {diff:.2e}");
    Ok(())
}
