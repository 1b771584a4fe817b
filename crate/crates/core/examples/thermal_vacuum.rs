//! A thermal vacuum as a condensate of pairs, built directly from the
//! weights and again by exponentiating the Bogoliubov generator.

use thermofield::thermal::{
    build_vacuum, condensate_occupation, entropy_closed_form, reconstruction_residual, suggested_n_max, ModeSpec,
    VACUUM_TAIL_TOL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = 0.6;
    let n_max = suggested_n_max(theta, VACUUM_TAIL_TOL);
    let vacuum = build_vacuum(&[ModeSpec::new(1.0, theta)?], n_max)?;

    println!("theta = {theta}, n_max = {n_max}, tail = {:.2e}", vacuum.tail(0)?);
    for (n, w) in vacuum.weights(0)?.iter().take(5).enumerate() {
        println!("  W_{n} = {w:.6}");
    }
    println!("condensate number {:.12}", vacuum.condensate_number(0)?);
    println!("sinh^2(theta)     {:.12}", condensate_occupation(theta));
    println!("entropy <S>       {:.12}", vacuum.entropy_expectation());
    println!("closed form       {:.12}", entropy_closed_form(condensate_occupation(theta)));

    for t in [0.1, 0.5, 1.0] {
        println!("exp(i theta G)|0,0~> vs weights at theta={t}: {:.2e}", reconstruction_residual(t, 40)?);
    }
    Ok(())
}
