//! Tree sizes from the brick wall against a direct Galton–Watson simulation.
//!
//! ```text
//! cargo run --release --example bgw_trees
//! ```

use brickwall::population::{bgw_tree_size_counts, tree_size_counts};
use brickwall::stats::chi_square_two_sample;
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let p = Probability::ratio;
    let law = BrickLaw::from_bgw(&[(0, p(1, 3)), (1, p(1, 3)), (2, p(1, 3))])?;
    let offspring = [(0, 1.0 / 3.0), (1, 1.0 / 3.0), (2, 1.0 / 3.0)];
    let cap = 10;
    let wall = tree_size_counts(&law, cap, 50_000, SeedTree::new(1))?;
    let direct = bgw_tree_size_counts(&offspring, cap, 50_000, SeedTree::new(2))?;
    println!("size   wall  direct");
    for (i, (a, b)) in wall.iter().zip(&direct).enumerate() {
        let label = if i < cap as usize { (i + 1).to_string() } else { format!(">{cap}") };
        println!("{label:>4} {a:>6} {b:>7}");
    }
    let t = chi_square_two_sample(&wall, &direct)?;
    println!("chi-square {:.2}, p = {:.3}", t.statistic, t.p_value);
    Ok(())
}
