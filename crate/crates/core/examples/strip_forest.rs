//! A finite strip: primal and dual trees, and a text dump.
//!
//! ```text
//! cargo run --example strip_forest
//! ```

use brickwall::forest::StripForest;
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 3), Probability::ratio(1, 3)), ((2, 1), Probability::ratio(2, 3))])?;
    let mut rng = SeedTree::new(3).rng(0);
    let strip = StripForest::build(&law, 6, -8..8, &mut rng)?;

    for i in -2..=2 {
        let t = strip.primal_tree(i)?;
        println!("primal tree {i:>2}: height {} size {:>3} profile {:?}", t.height(), t.size(), t.profile());
    }
    for v in -2..=2 {
        let t = strip.dual_tree(v)?;
        println!("dual tree   {v:>2}: height {} size {:>3} profile {:?}", t.height(), t.size(), t.profile());
    }

    // parent / children maps between adjacent levels
    println!();
    for x in -3..3 {
        let kids = strip.primal_children(0, x)?;
        let back: Vec<i64> = kids.clone().map(|y| strip.primal_parent(0, y)).collect::<Result<_, _>>()?;
        println!("node {x:>2} at level 0: children {kids:?}, their parents {back:?}");
    }

    print!("\n{}", strip.export_text(-3..3)?);
    Ok(())
}
