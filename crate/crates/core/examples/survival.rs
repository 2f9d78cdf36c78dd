//! Survival of a single tree: Kolmogorov's estimate and Yaglom's limit.
//!
//! ```text
//! cargo run --release --example survival
//! ```

use brickwall::population::{kolmogorov_estimate, yaglom_statistics};
use brickwall::stats::{ks_one_sample, Summary};
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 3), Probability::ratio(1, 3)), ((2, 1), Probability::ratio(2, 3))])?;
    let seeds = SeedTree::new(4);
    for n in [50u64, 100, 200] {
        let k = kolmogorov_estimate(&law, n, 200_000, 0.99, seeds.child(n))?;
        println!("n={n:>4}  n·P(τ ≥ n) = {:.4}  CI [{:.4}, {:.4}]  target 2/σ² = {:.4}", k.estimate, k.ci.0, k.ci.1, k.target);
    }

    let y = yaglom_statistics(&law, 100, 200_000, seeds.named("yaglom"))?;
    let mut cond = Summary::new();
    y.conditional.iter().for_each(|&x| cond.push(x));
    let rate = 2.0 / law.sigma_sq();
    let ks = ks_one_sample(&y.conditional, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() })?;
    println!(
        "\nYaglom n=100: {} survivors, E[M/n | alive] = {:.4} (σ²/2 = {:.4}), KS p = {:.3}",
        y.survivors,
        cond.mean,
        law.sigma_sq() / 2.0,
        ks.p_value
    );
    Ok(())
}
