//! Thermal averages from a Gibbs density against thermal-vacuum
//! expectations, followed by the KMS condition on the same ensemble.

use thermofield::fock::{FockOperator, FockSpace, Mode};
use thermofield::thermal::{build_vacuum, kms_check, minimize_mode, GibbsEnsemble, ModeSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (beta, energy, n_max) = (1.0, 1.0, 60);
    let space = FockSpace::single(n_max)?;
    let n = FockOperator::number(space, Mode::Plain)?;
    let a = FockOperator::annihilator(space, Mode::Plain)?;
    let x = a.try_add(&a.adjoint())?;

    let ens = GibbsEnsemble::new(n.scale_real(energy), beta)?;
    let theta = minimize_mode(energy, beta)?.theta;
    let vacuum = build_vacuum(&[ModeSpec::new(energy, theta)?], n_max)?;

    for (name, op) in [("N", n.clone()), ("N^2", n.compose(&n)?), ("a+a^dag", x.clone())] {
        let g = ens.average(&op)?;
        let v = vacuum.expectation_on_mode(0, &op)?.re;
        println!("{name:>8}: Tr(rho O) = {g:.15}  <0(theta)|O|0(theta)> = {v:.15}");
    }

    for t in [0.0, 0.5, 1.5] {
        let r = kms_check(&ens, &a, &a.adjoint(), t)?;
        println!("t={t}: <a a+(t)> = {:.12}  <a+(t-i beta) a> = {:.12}  residual {:.1e}", r.lhs, r.rhs, r.residual);
    }
    Ok(())
}
