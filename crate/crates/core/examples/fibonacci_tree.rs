//! The sigma-rule state tree and its Fibonacci census.

use thermofield::fibonacci::{generate, GenerationMode, StateTree};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tree = StateTree::build(4)?;
    for depth in 0..=4 {
        let states: Vec<String> = tree.at_depth(depth).map(|n| n.state.to_string()).collect();
        println!("depth {depth}: {}", states.join(" "));
    }

    let counts = generate(60, GenerationMode::Counts)?;
    for c in counts.iter().step_by(15) {
        println!("depth {:>2}: zeros {} ones {} total {}", c.depth, c.zeros, c.ones, c.total());
    }
    Ok(())
}
