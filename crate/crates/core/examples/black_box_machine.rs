//! A black-box machine read from text: its behaviour stream, observational
//! equivalence of states, and the bisimulation classes of the same system
//! seen as a transition system.

use thermofield::coalgebra::format::parse_machine;
use thermofield::coalgebra::{behaviour, observational_equivalence};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let cycle = parse_machine(&std::fs::read_to_string(format!("{dir}/two_cycle.tsv"))?)?;
    let stream = behaviour(&cycle, cycle.state("x")?, 6)?;
    println!("x emits {}", stream.colors.join(" "));

    let reds = parse_machine(&std::fs::read_to_string(format!("{dir}/reds.tsv"))?)?;
    for (a, b) in [("p", "q"), ("p", "s"), ("q", "r")] {
        let v = observational_equivalence(&reds, reds.state(a)?, &reds, reds.state(b)?)?;
        match v.first_difference {
            None => println!("{a} ~ {b}"),
            Some(i) => println!("{a} !~ {b}, first difference at {i}"),
        }
    }
    let classes = reds.to_lts().bisimulation_classes();
    println!("bisimulation classes {classes:?} over {:?}", reds.names());
    Ok(())
}
