//! Surviving dual trees of a strip: sizes of the image at level 0 and the
//! dual exponential limits.
//!
//! ```text
//! cargo run --release --example dual_survey
//! ```

use brickwall::forest::survey_samples;
use brickwall::stats::Summary;
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 2), Probability::ratio(1, 2)), ((2, 1), Probability::ratio(1, 2))])?;
    let target = law.sigma_sq() / 2.0;
    for r in [10usize, 25, 50] {
        let surveys = survey_samples(&law, r, 4000, SeedTree::new(5).child(r as u64))?;
        let (mut k, mut i) = (Summary::new(), Summary::new());
        for s in &surveys {
            k.push(s.k_r as f64 / r as f64);
            i.push(s.i_r as f64 / r as f64);
        }
        println!(
            "r={r:>3}  E[K/r]={:.4} ±{:.4}  E[I/r]={:.4} ±{:.4}  (limit σ²/2 = {target:.4})",
            k.mean,
            k.std_err(),
            i.mean,
            i.std_err()
        );
    }
    Ok(())
}
