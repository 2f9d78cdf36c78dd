use super::*;
use crate::laws::Probability;
use crate::stats::{chi_square_gof, chi_square_two_sample, ks_two_sample};
use proptest::prelude::*;

fn p(n: i64, d: i64) -> Probability {
    Probability::ratio(n, d)
}

fn simple() -> BrickLaw {
    BrickLaw::from_atoms(&[((1, 2), p(1, 2)), ((2, 1), p(1, 2))]).unwrap()
}

fn skewed() -> BrickLaw {
    BrickLaw::from_atoms(&[((1, 3), p(1, 3)), ((2, 1), p(2, 3))]).unwrap()
}

fn bgw() -> BrickLaw {
    BrickLaw::from_bgw(&[(0, p(1, 2)), (2, p(1, 2))]).unwrap()
}

fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[test]
fn forced_root_brick() {
    let row = RowRealization::with_root(0, (2, 3), 1, 0).unwrap();
    assert_eq!(row.root(), Brick { s: -1, b: 2, t: 0, h: 3 });
    assert_eq!(row.bottom_span(), (-1, 1));
    assert_eq!(row.top_span(), (0, 3));
    assert!(RowRealization::with_root(0, (2, 3), 2, 0).is_err());
}

#[test]
fn hand_enumerated_flows() {
    let row = RowRealization::fixed(&[Brick { s: -1, b: 2, t: 0, h: 3 }, Brick { s: 1, b: 2, t: 3, h: 1 }]).unwrap();
    let next = FlowState::new(vec![0, 2]).unwrap().through_row(&row).unwrap();
    assert_eq!(next.endpoints(), &[0, 3]);
    assert_eq!(next.populations(), vec![3]);
    assert_eq!(next.generation, 1);

    let next = FlowState::new(vec![0, 1]).unwrap().through_row(&row).unwrap();
    assert_eq!(next.endpoints(), &[0, 3]);

    let row = RowRealization::fixed(&[Brick { s: 0, b: 2, t: 0, h: 1 }]).unwrap();
    let next = FlowState::new(vec![0, 1]).unwrap().through_row(&row).unwrap();
    assert_eq!(next.populations(), vec![0]);
    assert_eq!(next.alive(), vec![false]);
    assert!(matches!(FlowState::new(vec![0, 5]).unwrap().through_row(&row), Err(Error::WindowTooSmall(_))));
}

#[test]
fn flow_state_validation() {
    assert!(FlowState::new(vec![3]).is_err());
    assert!(FlowState::new(vec![0, 0]).is_err());
    assert!(FlowState::new(vec![2, 1]).is_err());
    assert!(sample_row_over(&simple(), 3, 2, &mut rng(0)).is_err());
}

#[test]
fn covering_brick_is_size_biased_with_uniform_offset() {
    let law = skewed();
    let mut r = rng(11);
    let n = 1_000_000;
    let (mut wide, mut offsets) = (0u64, [0u64; 2]);
    for _ in 0..n {
        let row = sample_row_over(&law, 0, 0, &mut r).unwrap();
        if row.root().b == 2 {
            wide += 1;
            offsets[row.offset() as usize] += 1;
        }
    }
    assert!(chi_square_gof(&[n - wide, wide], &[0.2, 0.8]).unwrap().p_value > 1e-3);
    assert!(chi_square_gof(&offsets, &[0.5, 0.5]).unwrap().p_value > 1e-3);
}

#[test]
fn overflow_is_reported() {
    let huge = 1i64 << 58;
    let law = BrickLaw::from_atoms_unchecked(&[((huge, huge + 1), p(1, 1))]).unwrap();
    let mut row = RowRealization::sample(&law, 0, &mut rng(0));
    assert_eq!(row.cover_bottom(&law, 0, 1 << 62), Err(Error::Overflow("extending a row")));
}

/// Sample with the reference flow on a single slice `[0, n)`.
fn reference(law: &BrickLaw, n: i64, r: &mut SimRng) -> i64 {
    flow_step(&FlowState::new(vec![0, n]).unwrap(), law, r).unwrap().total()
}

fn histogram(xs: &[i64], bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &x in xs {
        h[(x.max(0) as usize).min(bins - 1)] += 1;
    }
    h
}

#[test]
fn fast_stepper_matches_reference_flow_in_law() {
    let mut r = rng(21);
    for law in [simple(), skewed(), bgw(), bgw().transpose()] {
        for &n in &[1i64, 3, 40, 600] {
            let reps = if n > 100 { 4000 } else { 20_000 };
            let a: Vec<i64> = (0..reps).map(|_| reference(&law, n, &mut r)).collect();
            let b: Vec<i64> = (0..reps).map(|_| one_step_population(&law, n, &mut r)).collect();
            if n <= 40 {
                let bins = (4 * n as usize + 12).min(200);
                let pv = chi_square_two_sample(&histogram(&a, bins), &histogram(&b, bins)).unwrap().p_value;
                assert!(pv > 1e-4, "{law} n={n}: p={pv}");
            } else {
                let fa: Vec<f64> = a.iter().map(|&x| x as f64).collect();
                let fb: Vec<f64> = b.iter().map(|&x| x as f64).collect();
                let pv = ks_two_sample(&fa, &fb).unwrap().p_value;
                assert!(pv > 1e-4, "{law} n={n}: p={pv}");
            }
        }
    }
}

#[test]
fn multi_slice_fast_stepper_matches_reference() {
    let law = skewed();
    let mut r = rng(5);
    let pops = [3i64, 0, 50, 1, 70];
    let ends: Vec<i64> = std::iter::once(0)
        .chain(pops.iter().scan(0, |acc, &p| {
            *acc += p;
            Some(*acc)
        }))
        .collect();
    let reps = 6000;
    let mut fast = vec![Vec::new(); pops.len()];
    let mut slow = vec![Vec::new(); pops.len()];
    for _ in 0..reps {
        let f = step_populations(&law, &pops, &mut r);
        // Reference with explicit endpoints; the empty slice is represented by a repeated endpoint.
        let row = sample_row_over(&law, 0, ends[ends.len() - 1], &mut r).unwrap();
        let imgs: Vec<i64> = ends.iter().map(|&x| row.psi(x).unwrap()).collect();
        for i in 0..pops.len() {
            fast[i].push(f[i] as f64);
            slow[i].push((imgs[i + 1] - imgs[i]) as f64);
        }
    }
    assert!(fast[1].iter().all(|&x| x == 0.0));
    for i in [0, 2, 3, 4] {
        let pv = ks_two_sample(&fast[i], &slow[i]).unwrap().p_value;
        assert!(pv > 1e-4, "slice {i}: p={pv}");
    }
}

#[test]
fn bgw_single_node_has_offspring_law() {
    let mut r = rng(8);
    for batched in [true, false] {
        let mut counts = [0u64; 3];
        for _ in 0..100_000 {
            let m = if batched { one_step_population(&bgw(), 1, &mut r) } else { reference(&bgw(), 1, &mut r) };
            counts[m as usize] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!(chi_square_gof(&[counts[0], counts[2]], &[0.5, 0.5]).unwrap().p_value > 1e-3);
    }
}

#[test]
fn martingale_at_small_sizes() {
    let mut r = rng(3);
    for law in [simple(), skewed(), bgw()] {
        for &n in &[1i64, 10, 100] {
            let s: crate::stats::Summary = (0..100_000).map(|_| one_step_population(&law, n, &mut r) as f64).collect();
            assert!((s.mean - n as f64).abs() < 4.0 * s.std_err(), "{law} n={n}: {}", s.mean);
        }
    }
}

#[test]
fn shift_invariance_of_slice_law() {
    let law = skewed();
    let mut r = rng(17);
    let n = 30;
    let sample = |a: i64, r: &mut SimRng| -> Vec<f64> {
        (0..20_000)
            .map(|_| {
                let row = sample_row_over(&law, 0, a + n, r).unwrap();
                (row.psi(a + n).unwrap() - row.psi(a).unwrap()) as f64
            })
            .collect()
    };
    let (x, y) = (sample(0, &mut r), sample(17, &mut r));
    assert!(ks_two_sample(&x, &y).unwrap().p_value > 1e-3);
}

proptest! {
    #[test]
    fn rows_tile_and_flow_is_monotone(seed in any::<u64>(), lo in -30i64..0, width in 1i64..60, cuts in prop::collection::vec(0i64..60, 1..6)) {
        let law = skewed();
        let mut r = rng(seed);
        let mut row = RowRealization::sample(&law, 0, &mut r);
        row.cover_bottom(&law, lo, lo + width).unwrap();
        let bricks: Vec<Brick> = row.bricks().collect();
        for w in bricks.windows(2) {
            prop_assert_eq!(w[1].s, w[0].bottom_end());
            prop_assert_eq!(w[1].t, w[0].top_end());
        }
        prop_assert_eq!(row.psi(0).unwrap(), 0);
        let mut ends: Vec<i64> = cuts.iter().map(|c| lo + c % width).collect();
        ends.push(lo);
        ends.sort();
        ends.dedup();
        let imgs: Vec<i64> = ends.iter().map(|&x| row.psi(x).unwrap()).collect();
        prop_assert!(imgs.windows(2).all(|w| w[0] <= w[1]));
        for (w, img) in ends.windows(2).zip(imgs.windows(2)) {
            // Population = total height of bricks whose right end lies in (x_i, x_{i+1}].
            let direct: i64 = bricks.iter().filter(|br| br.bottom_end() > w[0] && br.bottom_end() <= w[1]).map(|br| br.h).sum();
            prop_assert_eq!(img[1] - img[0], direct);
        }
        // Dual flow: Φ(Ψ(x)) ≤ x < Φ(Ψ(x) + 1) whenever both are sampled.
        for &x in &ends {
            let u = row.psi(x).unwrap();
            if let (Ok(a), Ok(b)) = (row.phi(u), row.phi(u + 1)) {
                prop_assert!(a <= x && x < b.max(a + 1));
            }
        }
    }
}
