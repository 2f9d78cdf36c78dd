use super::*;
use crate::laws::Probability;
use crate::stats::chi_square_two_sample;
use proptest::prelude::*;

fn law(atoms: &[((i64, i64), &str)]) -> BrickLaw {
    let atoms: Vec<_> = atoms.iter().map(|&(bh, p)| (bh, p.parse::<Probability>().unwrap())).collect();
    BrickLaw::from_atoms(&atoms).unwrap()
}

fn symmetric() -> BrickLaw {
    law(&[((1, 2), "1/2"), ((2, 1), "1/2")])
}

fn skewed() -> BrickLaw {
    law(&[((1, 3), "1/3"), ((2, 1), "2/3")])
}

#[test]
fn path_starts_at_lengths_and_absorbs() {
    let law = skewed();
    let mut rng = SeedTree::new(1).rng(0);
    let path = run_slices(&law, &[-3, 0, 2, 7], 200, &RunOptions::default(), &mut rng).unwrap();
    assert_eq!(path.slices[0], vec![3, 2, 5]);
    for i in 0..3 {
        let s = path.slice(i);
        assert!(s.iter().all(|&p| p >= 0));
        if let Some(t) = path.extinction_times[i] {
            assert_eq!(s[t as usize], 0);
            assert!(s[..t as usize].iter().all(|&p| p > 0));
            assert!(s[t as usize..].iter().all(|&p| p == 0));
        }
    }
}

#[test]
fn bad_arguments() {
    let mut rng = SeedTree::new(1).rng(0);
    let o = RunOptions::default();
    assert!(run_slices(&symmetric(), &[0], 5, &o, &mut rng).is_err());
    assert!(run_slices(&symmetric(), &[0, 0], 5, &o, &mut rng).is_err());
    assert!(run_slices(&symmetric(), &[0, 1], 0, &o, &mut rng).is_err());
    assert!(long_thin_tail(&symmetric(), 5, 4, 3, 10, SeedTree::new(0)).is_err());
}

#[test]
fn stop_rule_and_hitting_times() {
    let law = symmetric();
    let options = RunOptions {
        stop: Some(StopRule::strip(100, 0.5)),
        hit_sets: vec![HitSet::AtLeast(120), HitSet::AtMost(80)],
        ..RunOptions::default()
    };
    assert_eq!(StopRule::strip(100, 0.5), StopRule { lower: 50, upper: 200 });
    for seed in 0..20 {
        let mut rng = SeedTree::new(seed).rng(0);
        let path = run_slices(&law, &[0, 100], 100_000, &options, &mut rng).unwrap();
        let k = path.stopped_at.expect("a critical chain leaves any strip");
        assert_eq!(k, path.last_generation());
        let s = path.slice(0);
        assert!(s[..k as usize].iter().all(|&p| p > 50 && p < 200));
        for (j, set) in options.hit_sets.iter().enumerate() {
            let first = s.iter().position(|&p| set.contains(p)).map(|i| i as u64);
            assert_eq!(path.hitting_times[0][j], first);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Brick by brick, the merged slice is the sum of its parts.
    #[test]
    fn merged_slice_is_sum_of_parts(seed in any::<u64>(), cuts in proptest::collection::btree_set(1i64..60, 1..5)) {
        let law = skewed();
        let mut endpoints = vec![0];
        endpoints.extend(cuts.iter().copied());
        endpoints.push(60);
        let options = RunOptions { step: StepMode::Bricks, ..RunOptions::default() };
        let parts = run_slices(&law, &endpoints, 30, &options, &mut SeedTree::new(seed).rng(0)).unwrap();
        let merged = run_slices(&law, &[0, 60], 30, &options, &mut SeedTree::new(seed).rng(0)).unwrap();
        for k in 0..merged.slices.len().min(parts.slices.len()) {
            prop_assert_eq!(parts.slices[k].iter().sum::<i64>(), merged.slices[k][0]);
        }
        prop_assert_eq!(parts.slices.len(), merged.slices.len());
    }
}

#[test]
fn martingale_over_generations() {
    let law = skewed();
    for &k in &[1u64, 5, 20] {
        let pops = populations_at(&law, 50, k, 40_000, SeedTree::new(k)).unwrap();
        let s: Summary = pops.iter().map(|&p| p as f64).collect();
        assert!((s.mean - 50.0).abs() < 3.0 * s.std_err(), "k={k}: {} ± {}", s.mean, s.std_err());
    }
}

#[test]
fn one_step_variance_and_drift() {
    let law = symmetric();
    let s = one_step_stats(&law, 1000, 100_000, SeedTree::new(9)).unwrap();
    assert!((s.mean.mean - 1.0).abs() < 3.0 * s.mean.std_err());
    assert!((s.variance.mean / law.sigma_sq() - 1.0).abs() < 0.03);
    // −(√M − √n)²/2 ≈ −σ²/8
    assert!(s.sqrt_drift.mean + 3.0 * s.sqrt_drift.std_err() < 0.0);
    assert!((s.sqrt_drift.mean + law.sigma_sq() / 8.0).abs() < 0.01);
}

#[test]
fn independent_mode_decouples_slices() {
    // Two adjacent nodes cannot both die in one shared row: if the left one
    // is not a bottom-right corner, the right one is.
    let law = symmetric();
    let both_dead = |slices| {
        (0..30_000)
            .filter(|&idx| {
                let mut chain = SliceChain::new(&[1, 1], StepMode::Batched, slices);
                chain.advance(&law, &mut SeedTree::new(2).rng(idx));
                chain.is_extinct()
            })
            .count() as f64
            / 30_000.0
    };
    assert_eq!(both_dead(SliceMode::Joint), 0.0);
    assert!((both_dead(SliceMode::Independent) - 1.0 / 9.0).abs() < 0.01);
}

#[test]
fn tree_sizes_match_direct_galton_watson() {
    let half = "1/2".parse::<Probability>().unwrap();
    let law = BrickLaw::from_bgw(&[(0, half.clone()), (2, half)]).unwrap();
    let wall = tree_size_counts(&law, 12, 20_000, SeedTree::new(4)).unwrap();
    let direct = bgw_tree_size_counts(&[(0, 0.5), (2, 0.5)], 12, 20_000, SeedTree::new(5)).unwrap();
    assert_eq!(wall.iter().sum::<u64>(), 20_000);
    // Binary trees have odd sizes only.
    assert!(wall.iter().skip(1).step_by(2).take(6).all(|&c| c == 0));
    assert!(chi_square_two_sample(&wall, &direct).unwrap().p_value > 0.001);
}

#[test]
fn csv_dump() {
    let mut rng = SeedTree::new(1).rng(0);
    let path = run_slices(&symmetric(), &[0, 1, 3], 2, &RunOptions::default(), &mut rng).unwrap();
    let mut buf = Vec::new();
    let meta = CsvMeta { law: "sym".into(), seed: 1, horizon: 2 };
    write_paths_csv(std::slice::from_ref(&path), &meta, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# law: sym");
    assert_eq!(lines[3], "replica,generation,slice_index,population");
    assert_eq!(lines[4], "0,0,0,1");
    assert_eq!(lines[5], "0,0,1,2");
    assert_eq!(lines.len(), 4 + 2 * path.slices.len());
}

#[test]
fn long_thin_edge_case() {
    let t = long_thin_tail(&symmetric(), 10, 10, 3, 1000, SeedTree::new(0)).unwrap();
    assert_eq!(t.probability(0), 1.0);
    assert!(t.successes.windows(2).all(|w| w[0] >= w[1]));
}
