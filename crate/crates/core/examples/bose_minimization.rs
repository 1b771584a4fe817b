//! Minimizing the free energy mode by mode recovers the Bose distribution.

use thermofield::thermal::{bose_occupation, minimize_free_energy, minimize_mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 1.0;
    println!("{:>6} {:>14} {:>18} {:>18} {:>10}", "E", "theta", "sinh^2 theta", "1/(e^bE - 1)", "|diff|");
    for e in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let m = minimize_mode(e, beta)?;
        let n = bose_occupation(beta, e);
        println!("{e:>6} {:>14.10} {:>18.12} {n:>18.12} {:>10.1e}", m.theta, m.occupation, (m.occupation - n).abs());
    }

    let vacuum = minimize_free_energy(&[0.5, 1.0, 2.0], beta)?;
    println!("three-mode vacuum: n_max = {}, order parameter {:?}", vacuum.n_max(), vacuum.order_parameter());
    Ok(())
}
