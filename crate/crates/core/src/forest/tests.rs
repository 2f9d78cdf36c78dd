use super::*;
use crate::laws::Probability;
use crate::row_flow::{flow_step, FlowState};
use crate::SimRng;
use proptest::prelude::*;
use rand::SeedableRng;
use std::collections::{HashMap, HashSet, VecDeque};

fn p(n: i64, d: i64) -> Probability {
    Probability::ratio(n, d)
}

fn grid() -> BrickLaw {
    BrickLaw::from_atoms_unchecked(&[((1, 1), p(1, 1))]).unwrap()
}

fn simple() -> BrickLaw {
    BrickLaw::from_atoms(&[((1, 2), p(1, 2)), ((2, 1), p(1, 2))]).unwrap()
}

fn skewed() -> BrickLaw {
    BrickLaw::from_atoms(&[((1, 3), p(1, 3)), ((2, 1), p(2, 3))]).unwrap()
}

fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[test]
fn unit_grid() {
    let strip = StripForest::build(&grid(), 4, -5..6, &mut rng(0)).unwrap();
    for i in -5..6 {
        let t = strip.primal_tree(i).unwrap();
        assert_eq!(t.profile(), vec![1; 5]);
        assert_eq!(t.levels()[4][0].position, i);
    }
    let s = survey_duality(&strip, &mut rng(1)).unwrap();
    assert_eq!(s, DualSurvey { i_r: 1, k_r: 1, first_dual: 1, j_r: 1 });
    let re = reroot_dual(&strip, &s).unwrap();
    for k in 0..4 {
        assert!(re.strip.row(k).bricks().all(|br| br.b == 1 && br.h == 1 && br.s == br.t));
    }
    assert_eq!(re.strip.primal_tree(0).unwrap().profile(), vec![1; 5]);
}

#[test]
fn hand_checked_row() {
    let row = RowRealization::fixed(&[Brick { s: -1, b: 2, t: 0, h: 3 }, Brick { s: 1, b: 2, t: 3, h: 1 }]).unwrap();
    let strip = StripForest::from_rows(&simple(), vec![row]).unwrap();
    assert_eq!(strip.primal_children(0, 0).unwrap(), 0..3);
    assert_eq!(strip.primal_children(0, -1).unwrap(), 0..0);
    assert_eq!(strip.primal_parent(0, 2).unwrap(), 0);
    assert_eq!(strip.dual_children(0, 0).unwrap(), -1..1);
    assert_eq!(strip.dual_children(0, 1).unwrap(), 1..1);
    assert_eq!(strip.dual_parent(0, -1).unwrap(), 0);
    assert_eq!(strip.dual_parent(0, 1).unwrap(), 3);
    let text = strip.export_text(-1..3).unwrap();
    assert!(text.contains("\n0 -1 2 0 3\n"));
    assert!(text.contains("\nP 0 1 5\n"));
    assert!(text.contains("\nD 1 0 -2\n"));
    assert!(strip.export_svg(-1..3).unwrap().starts_with("<svg"));
}

#[test]
fn rerooting_a_single_wide_brick_gives_a_corner() {
    let row = RowRealization::fixed(&[
        Brick { s: -2, b: 1, t: -1, h: 1 },
        Brick { s: -1, b: 2, t: 0, h: 1 },
        Brick { s: 1, b: 1, t: 1, h: 1 },
    ])
    .unwrap();
    let strip = StripForest::from_rows(&simple(), vec![row]).unwrap();
    let re = reroot_dual(&strip, &DualSurvey { i_r: 1, k_r: 1, first_dual: 1, j_r: 0 }).unwrap();
    let root = re.strip.primal_tree(0).unwrap();
    assert_eq!(root.profile(), vec![1, 2]);
    let corner = re.strip.row(0).brick_at_bottom(0).unwrap();
    assert_eq!((corner.b, corner.h), (1, 2));
}

/// `Ψ^r(x)` by composing row maps.
fn image(strip: &StripForest, x: i64) -> i64 {
    (0..strip.height()).fold(x, |y, k| strip.psi(k, y).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjacency_is_consistent(seed in any::<u64>(), r in 1usize..5) {
        for law in [skewed(), simple().transpose()] {
            let strip = StripForest::build(&law, r, -15..15, &mut rng(seed)).unwrap();
            for k in 0..r {
                let (lo, hi) = strip.row(k).bottom_span();
                let mut total_children = 0;
                for x in lo..hi {
                    let kids = strip.primal_children(k, x).unwrap();
                    total_children += kids.end - kids.start;
                    for y in kids {
                        prop_assert_eq!(strip.primal_parent(k, y).unwrap(), x);
                    }
                }
                let heights: i64 = strip.row(k).bricks().map(|b| b.h).sum();
                prop_assert_eq!(total_children, heights);
                let (tlo, thi) = strip.row(k).top_span();
                for v in tlo..thi {
                    if let Ok(kids) = strip.dual_children(k, v) {
                        for u in kids {
                            prop_assert_eq!(strip.dual_parent(k, u).unwrap(), v);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn survey_matches_dual_survival(seed in any::<u64>(), r in 1usize..5) {
        let mut strip = StripForest::lazy(&skewed(), r, &mut rng(seed)).unwrap();
        let s = survey_duality_growing(&mut strip, &mut rng(seed ^ 1)).unwrap();
        prop_assert!(s.k_r >= 1 && (1..=s.first_dual).contains(&s.j_r));
        let t = strip.primal_tree(s.i_r).unwrap();
        prop_assert_eq!(t.height(), r);
        prop_assert_eq!(t.profile()[r] as i64, s.k_r);
        for i in 1..s.i_r {
            prop_assert!(strip.primal_tree(i).unwrap().height() < r);
        }
        // First dual tree from level r reaching level 0: it is K_r when the
        // root tree dies before r, and Ψ^r(1) otherwise.
        let mut first = 1;
        while strip.dual_tree_grow(first).unwrap().height() < r {
            first += 1;
        }
        let root_survives = image(&strip, 1) > 0;
        prop_assert_eq!(first, if root_survives { image(&strip, 1) } else { s.k_r });
        prop_assert_eq!(first, s.first_dual);
        for v in 1..first {
            prop_assert!(strip.dual_tree(v).unwrap().height() < r);
        }
    }

    #[test]
    fn rerooting_is_an_isometry(seed in any::<u64>(), r in 1usize..4) {
        let mut strip = StripForest::lazy(&skewed(), r, &mut rng(seed)).unwrap();
        let s = survey_duality_growing(&mut strip, &mut rng(seed ^ 7)).unwrap();
        for d in -1..=1 {
            strip.dual_tree_grow(s.j_r + d).unwrap();
        }
        let re = reroot_dual(&strip, &s).unwrap();
        for i in -1..=1 {
            let old = strip.dual_tree(s.j_r - i).unwrap();
            let new = re.strip.primal_tree(i).unwrap();
            prop_assert_eq!(old.profile(), new.profile());
            // Positions map by u -> J - u with plane order reversed.
            for (lo, ln) in old.levels().iter().zip(new.levels()) {
                let mapped: Vec<i64> = lo.iter().rev().map(|n| s.j_r - n.position).collect();
                let got: Vec<i64> = ln.iter().map(|n| n.position).collect();
                prop_assert_eq!(mapped, got);
            }
            let nodes = |t: &PlaneTree| -> Vec<(usize, usize)> {
                t.levels().iter().enumerate().flat_map(|(l, v)| (0..v.len()).map(move |i| (l, i))).collect()
            };
            let (on, nn) = (nodes(&old), nodes(&new));
            for &a in &on {
                for &b in &on {
                    let flip = |(l, i): (usize, usize)| (l, old.levels()[l].len() - 1 - i);
                    prop_assert_eq!(old.distance(a, b), new.distance(flip(a), flip(b)));
                }
            }
            prop_assert_eq!(on.len(), nn.len());
        }
    }

    #[test]
    fn strip_matches_flow(seed in any::<u64>(), r in 1usize..5, cuts in prop::collection::btree_set(1i64..12, 1..4)) {
        let law = skewed();
        let mut ends = vec![0];
        ends.extend(cuts.iter().copied());
        let mut a = rng(seed);
        let mut state = FlowState::new(ends.clone()).unwrap();
        let mut flow = vec![state.populations()];
        for _ in 0..r {
            state = flow_step(&state, &law, &mut a).unwrap();
            flow.push(state.populations());
        }
        let mut strip = StripForest::lazy(&law, r, &mut rng(seed)).unwrap();
        prop_assert_eq!(strip.slice_populations(&ends, true).unwrap(), flow);
    }
}

#[test]
fn mean_first_survivor_size_at_height_one() {
    let mut r = rng(4);
    for law in [skewed(), simple()] {
        let s: crate::stats::Summary = (0..200_000)
            .map(|_| {
                let mut strip = StripForest::lazy(&law, 1, &mut r).unwrap();
                survey_duality_growing(&mut strip, &mut r).unwrap().k_r as f64
            })
            .collect();
        let want = law.mean_product() / law.z();
        assert!((s.mean - want).abs() < 4.0 * s.std_err(), "{law}: {} vs {want}", s.mean);
    }
}

/// Brute force: explicit graph of the trees of roots -radius..=radius
/// joined along the baseline; spanned nodes by subtree search, distances
/// by multi-source BFS.
fn brute_force_hausdorff(strip: &StripForest, m: i64, radius: i64) -> i64 {
    let top = strip.height();
    let mut adj: HashMap<(usize, i64), Vec<(usize, i64)>> = HashMap::new();
    let mut all = Vec::new();
    let mut frontier: Vec<(usize, i64)> = (-radius..=radius).map(|a| (0, a)).collect();
    for a in -radius..radius {
        adj.entry((0, a)).or_default().push((0, a + 1));
        adj.entry((0, a + 1)).or_default().push((0, a));
    }
    while let Some((k, x)) = frontier.pop() {
        all.push((k, x));
        if k == top {
            continue;
        }
        for y in strip.primal_children(k, x).unwrap() {
            adj.entry((k, x)).or_default().push((k + 1, y));
            adj.entry((k + 1, y)).or_default().push((k, x));
            frontier.push((k + 1, y));
        }
    }
    let is_mesh = |(k, x): (usize, i64)| k as i64 % m == 0 && x.rem_euclid(m) == 0;
    let spanned = |node: (usize, i64)| -> bool {
        let mut stack = vec![node];
        while let Some((k, x)) = stack.pop() {
            if is_mesh((k, x)) {
                return true;
            }
            if k < top {
                stack.extend(strip.primal_children(k, x).unwrap().map(|y| (k + 1, y)));
            }
        }
        false
    };
    let bfs = |sources: Vec<(usize, i64)>| -> HashMap<(usize, i64), i64> {
        let mut dist: HashMap<(usize, i64), i64> = sources.iter().map(|&s| (s, 0)).collect();
        let mut queue: VecDeque<_> = sources.into_iter().collect();
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for &w in adj.get(&v).map(|v| v.as_slice()).unwrap_or(&[]) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    };
    let from_root = bfs(vec![(0, 0)]);
    let sources: Vec<_> = all.iter().copied().filter(|&v| v.0 == 0 || spanned(v)).collect::<HashSet<_>>().into_iter().collect();
    let to_mesh = bfs(sources);
    all.iter().filter(|v| from_root[v] <= radius).map(|v| to_mesh[v]).max().unwrap()
}

#[test]
fn meshing_on_the_unit_grid() {
    let strip = StripForest::ball(&grid(), 8, 12, &mut rng(0)).unwrap();
    let full = mesh_subforest(&strip, 1).unwrap();
    assert_eq!(full.spanned_count(), full.node_count());
    assert_eq!(hausdorff_to_mesh(&strip, &full, 8).unwrap(), 0);
    for m in [2i64, 3, 4] {
        let mesh = mesh_subforest(&strip, m).unwrap();
        assert!(mesh.spanned_count() < mesh.node_count());
        assert_eq!(mesh.spanned(2, 0), Some(true));
        assert_eq!(mesh.spanned(2, 1), Some(false));
        assert_eq!(hausdorff_to_mesh(&strip, &mesh, 8).unwrap(), 7);
        assert_eq!(brute_force_hausdorff(&strip, m, 8), 7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn meshing_matches_brute_force(seed in any::<u64>(), radius in 1i64..10) {
        let law = simple();
        let strip = StripForest::ball(&law, radius, radius as usize + 6, &mut rng(seed)).unwrap();
        let mut last = -1;
        for m in [1i64, 2, 4, 8] {
            let mesh = mesh_subforest(&strip, m).unwrap();
            let d = hausdorff_to_mesh(&strip, &mesh, radius).unwrap();
            prop_assert_eq!(d, brute_force_hausdorff(&strip, m, radius));
            prop_assert!(d >= last);
            last = d;
        }
    }
}

#[test]
fn small_window_is_reported() {
    let strip = StripForest::build(&skewed(), 3, 0..2, &mut rng(2)).unwrap();
    let mesh = mesh_subforest(&strip, 2).unwrap();
    assert!(matches!(hausdorff_to_mesh(&strip, &mesh, 50), Err(Error::WindowTooSmall(_))));
    assert!(StripForest::build(&skewed(), 0, 0..2, &mut rng(2)).is_err());
    assert!(StripForest::build(&skewed(), 2, 3..3, &mut rng(2)).is_err());
}
