//! Slice population paths, dumped as plot-ready CSV on stdout.
//!
//! ```text
//! cargo run --release --example population_paths > paths.csv
//! ```

use brickwall::population::{simulate_paths, write_paths_csv, CsvMeta, HitSet, RunOptions, StopRule};
use brickwall::{BrickLaw, Probability, SeedTree};

fn main() -> brickwall::Result<()> {
    let law = BrickLaw::from_atoms(&[((1, 2), Probability::ratio(1, 2)), ((2, 1), Probability::ratio(1, 2))])?;
    let endpoints = [0, 500, 1000, 1500];
    let options =
        RunOptions { stop: Some(StopRule::strip(500, 0.05)), hit_sets: vec![HitSet::AtLeast(1000)], ..RunOptions::default() };
    let paths = simulate_paths(&law, &endpoints, 2000, &options, 5, SeedTree::new(2))?;
    for (r, p) in paths.iter().enumerate() {
        eprintln!(
            "replica {r}: {} generations, stopped at {:?}, extinctions {:?}, first ≥1000 {:?}",
            p.last_generation(),
            p.stopped_at,
            p.extinction_times,
            p.hitting_times.iter().map(|h| h[0]).collect::<Vec<_>>()
        );
    }
    let meta = CsvMeta { law: law.label().into(), seed: 2, horizon: 2000 };
    write_paths_csv(&paths, &meta, std::io::stdout().lock())
}
