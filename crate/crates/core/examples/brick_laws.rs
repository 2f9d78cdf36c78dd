//! Building brick laws and reading off their moments.
//!
//! ```text
//! cargo run --example brick_laws
//! ```

use brickwall::{BrickLaw, Probability};

fn main() -> brickwall::Result<()> {
    let p = Probability::ratio;
    let laws = [
        BrickLaw::from_atoms(&[((1, 2), p(1, 2)), ((2, 1), p(1, 2))])?,
        BrickLaw::from_atoms(&[((1, 3), p(1, 3)), ((2, 1), p(2, 3))])?,
        // Galton–Watson offspring law {0: 1/2, 2: 1/2}
        BrickLaw::from_bgw(&[(0, p(1, 2)), (2, p(1, 2))])?,
        // continuous time: births of 2 at rate 1, deaths of 1 at rate λ, N = 10 steps per unit
        BrickLaw::from_continuous_time(&[(2, p(1, 1))], &[(1, p(1, 1))], 10)?,
    ];
    println!("{:<32} {:>8} {:>10} {:>6}  exact σ²", "law", "Z", "σ²", "span");
    for law in &laws {
        let exact = law.exact_sigma_sq().map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        println!("{:<32} {:>8.4} {:>10.6} {:>6}  {exact}", law.label(), law.z(), law.sigma_sq(), law.lattice_span());
    }

    // transposition swaps bottoms and tops; σ² is invariant
    let skewed = &laws[1];
    let t = skewed.transpose();
    println!("\ntranspose of {}: {}  (σ² {:.6})", skewed.label(), t.label(), t.sigma_sq());

    // size-biased brick covering a fixed node
    let mut rng = brickwall::SeedTree::new(1).rng(0);
    let n = 100_000;
    let wide = (0..n).filter(|_| skewed.sample_biased(&mut rng) == (2, 1)).count();
    println!("size-biased P((2,1)) ≈ {:.4}  (exact 2·(2/3)/Z = 0.8)", wide as f64 / n as f64);

    // probabilities not summing to 1 are rejected
    let bad = BrickLaw::from_atoms(&[((1, 2), p(1, 2)), ((2, 1), p(1, 3))]);
    println!("unnormalised law: {}", bad.unwrap_err());
    Ok(())
}
