//! Modular conjugation on a single-mode thermal vacuum.

use thermofield::thermal::{build_vacuum, modular_checks, suggested_n_max, ModeSpec, VACUUM_TAIL_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for theta in [0.0, 0.5, 1.0] {
        let n_max = suggested_n_max(theta, VACUUM_TAIL_TOL).max(8);
        let vacuum = build_vacuum(&[ModeSpec::new(1.0, theta)?], n_max)?;
        let r = modular_checks(&vacuum)?;
        println!("theta = {theta} (beta = {})", r.beta);
        println!("  J^2 = 1 exactly:      {}", r.j_squared_exact);
        println!("  |J|0> - |0>|          {:.1e}", r.vacuum_fixed_residual);
        println!("  |Hbar|0>|             {:.1e}", r.hbar_annihilates_residual);
        println!("  relation, M = A       {:.1e}", r.relation_residual_a);
        println!("  relation, M = A^dag   {:.1e}", r.relation_residual_a_dag);
        println!("  relation, degree two  {:.1e}", r.relation_residual_degree_two);
    }
    Ok(())
}
