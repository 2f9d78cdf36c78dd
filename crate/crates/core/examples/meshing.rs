//! Distance from a strip ball to its ε-mesh sub-forest, for shrinking ε.
//!
//! ```text
//! cargo run --release --example meshing
//! ```

use brickwall::forest::mesh_distances;
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 2), Probability::ratio(1, 2)), ((2, 1), Probability::ratio(1, 2))])?;
    let n = 400;
    let steps = [n / 4, n / 8, n / 16];
    let d = mesh_distances(&law, n, &steps, 20, SeedTree::new(9))?;
    for (j, step) in steps.iter().enumerate() {
        let mut col: Vec<i64> = d.iter().map(|row| row[j]).collect();
        col.sort();
        println!("mesh step {step:>3}: median distance/n = {:.3}", col[col.len() / 2] as f64 / n as f64);
    }
    Ok(())
}
