//! Mixed two-level states: evolution, the pair-basis generator and the
//! entanglement entropy of the doubled state.

use std::f64::consts::FRAC_PI_4;

use thermofield::qubit::{
    evolve, mix, mixing_frequency, mixing_frequency_numeric, pair_entropy, pair_generator, TwoLevelParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = TwoLevelParams::new(1.0, 1.6, FRAC_PI_4)?;
    let pair = mix(&params);
    println!("orthonormality residual {:.1e}", pair.orthonormality_residual());

    for t in [0.0, 1.0, 2.0, 3.0] {
        let s = evolve(&pair, &params, t);
        let e = pair_entropy(&s)?;
        println!("t={t}: phi = [{:.4}, {:.4}]  S(phi) = {:.12}", s.phi[0], s.phi[1], e.phi.0);
    }

    println!("omega_phipsi          {:.10}", mixing_frequency(&params));
    println!("finite difference     {:.10}", mixing_frequency_numeric(&params, 0.7, 1e-5).re);
    let g = pair_generator(&params);
    println!("F = diag({:.4}, {:.4})", g.free_energy[0][0].re, g.free_energy[1][1].re);
    Ok(())
}
