//! The limiting Feller diffusion: exact transitions against Euler, and
//! against the rescaled brick-wall population.
//!
//! ```text
//! cargo run --release --example feller
//! ```

use brickwall::feller::{euler_terminal, exact_transition, extinction_cdf, FellerParams};
use brickwall::population::populations_at;
use brickwall::stats::{ks_two_sample, Summary};
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 2), Probability::ratio(1, 2)), ((2, 1), Probability::ratio(1, 2))])?;
    let params = FellerParams::new(law.sigma_sq(), 1.0)?;
    let seeds = SeedTree::new(8);
    let reps = 20_000;

    let mut rng = seeds.rng(0);
    let exact: Vec<f64> = (0..reps).map(|_| exact_transition(&params, 1.0, &mut rng)).collect();
    let euler: Vec<f64> = (0..2000).map(|_| euler_terminal(&params, 1e-3, 1.0, &mut rng)).collect();
    let n = 500;
    let wall: Vec<f64> = populations_at(&law, n, n as u64, reps, seeds.child(1))?.iter().map(|&m| m as f64 / n as f64).collect();

    let zeros = |v: &[f64]| v.iter().filter(|&&x| x == 0.0).count() as f64 / v.len() as f64;
    let mean = |v: &[f64]| {
        let mut s = Summary::new();
        v.iter().for_each(|&x| s.push(x));
        s.mean
    };
    println!("P(X₁ = 0) closed form {:.4}", extinction_cdf(&params, 1.0));
    for (name, v) in [("exact", &exact), ("euler", &euler), ("wall n=500", &wall)] {
        println!("{name:<11} P(0) {:.4}  mean {:.4}", zeros(v), mean(v));
    }
    let pos = |v: &[f64]| v.iter().copied().filter(|&x| x > 0.0).collect::<Vec<_>>();
    println!("KS exact vs euler (positive part): p = {:.3}", ks_two_sample(&pos(&exact), &pos(&euler))?.p_value);
    Ok(())
}
