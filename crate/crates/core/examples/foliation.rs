//! The vacuum foliation read as a machine: each vacuum on a grid of angles
//! emits its condensate number and steps to the next one.

use thermofield::coalgebra::{behaviour, foliation_as_machine, DEFAULT_LABEL_DIGITS};
use thermofield::thermal::{condensate_occupation, vacuum_overlap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<f64> = (0..6).map(|i| 0.3 * i as f64).collect();
    let fol = foliation_as_machine(&grid, DEFAULT_LABEL_DIGITS)?;
    let stream = behaviour(&fol.machine, 0, grid.len() + 2)?;
    for (i, label) in stream.colors.iter().enumerate() {
        println!("step {i}: N = {label}");
    }
    for w in grid.windows(2) {
        println!(
            "<0({:.1})|0({:.1})> = {:.10}   sinh^2 = {:.6}",
            w[0],
            w[1],
            vacuum_overlap(w[0], w[1], 200),
            condensate_occupation(w[1])
        );
    }
    Ok(())
}
