//! Both sides of the duality identity for a few window functionals.
//!
//! ```text
//! cargo run --release --example duality
//! ```

use brickwall::forest::{check_duality, WindowFunctional};
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 3), Probability::ratio(1, 3)), ((2, 1), Probability::ratio(2, 3))])?;
    let seeds = SeedTree::new(11);
    println!("{:<18} {:>2} {:>22} {:>22}  overlap", "functional", "r", "dual side (99% CI)", "primal side (99% CI)");
    for r in 1..=3 {
        for c in check_duality(&law, r, &WindowFunctional::ALL, 20_000, seeds.child(r as u64), 0.99)? {
            println!(
                "{:<18} {:>2} {:>8.4} ±{:>6.4}      {:>8.4} ±{:>6.4}      {}",
                c.functional.name(),
                r,
                c.lhs.mean,
                c.lhs.mean - c.lhs.ci.0,
                c.rhs.mean,
                c.rhs.mean - c.rhs.ci.0,
                c.overlap
            );
        }
    }
    Ok(())
}
