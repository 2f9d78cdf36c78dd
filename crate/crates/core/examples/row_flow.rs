//! One stationary row of bricks and the endpoint flow through it.
//!
//! ```text
//! cargo run --example row_flow
//! ```

use brickwall::row_flow::{sample_row_over, step_populations};
use brickwall::{flow_step, BrickLaw, FlowState, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 2), Probability::ratio(1, 2)), ((2, 1), Probability::ratio(1, 2))])?;
    let seeds = SeedTree::new(7);

    let mut rng = seeds.rng(0);
    let row = sample_row_over(&law, -6, 6, &mut rng)?;
    println!("row anchored at {}, root brick {:?}", row.anchor(), row.root());
    for b in row.bricks() {
        println!("  bottom [{:>3},{:>3})  top [{:>3},{:>3})", b.s, b.bottom_end(), b.t, b.top_end());
    }

    // follow the endpoints of three adjacent slices for a few generations
    let mut state = FlowState::new(vec![0, 10, 20, 30])?;
    let mut rng = seeds.rng(1);
    println!("\ngen  endpoints                populations");
    for _ in 0..8 {
        println!("{:>3}  {:<24} {:?}", state.generation, format!("{:?}", state.endpoints()), state.populations());
        state = flow_step(&state, &law, &mut rng)?;
    }

    // populations only: the fast path used for large n
    let mut rng = seeds.rng(2);
    let mut pops = vec![100_000, 100_000];
    for _ in 0..5 {
        pops = step_populations(&law, &pops, &mut rng);
    }
    println!("\nafter 5 generations from 2×10⁵: {pops:?}");
    Ok(())
}
