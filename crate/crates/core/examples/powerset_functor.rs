//! Covariant and contravariant powerset functors on finite functions.

use thermofield::coalgebra::{powerset_functor_check, FiniteFunction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = FiniteFunction::new(vec![0, 2, 2, 1], 3)?;
    let g = FiniteFunction::new(vec![1, 1, 0], 2)?;
    let r = powerset_functor_check(&f, &g)?;
    println!("{r:#?}");

    let s = 0b0110;
    println!("f[{{1,2}}] = {:#05b}", f.image(s));
    println!("f^-1[{{2}}] = {:#06b}", f.preimage(0b100));
    Ok(())
}
