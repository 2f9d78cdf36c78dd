//! Dual surveys, re-rooting of the dual strip and the duality check.

use super::{PlaneTree, StripForest};
use crate::error::{Error, Result};
use crate::laws::BrickLaw;
use crate::parallel;
use crate::rng::SeedTree;
use crate::row_flow::{Brick, RowRealization};
use crate::stats::{intervals_overlap, Summary};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// First primal tree right of the root reaching the strip top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSurvey {
    /// Smallest `i > 0` whose tree has height at least `r`.
    pub i_r: i64,
    /// Number of its nodes at level `r`.
    pub k_r: i64,
    /// First `i ≥ 1` whose dual tree from `(i, r)` reaches level 0. Equals
    /// `k_r` unless the root tree itself reaches level `r`, in which case
    /// it is the root tree's level-`r` size.
    pub first_dual: i64,
    /// Uniform re-rooting index in `1..=first_dual`.
    pub j_r: i64,
}

/// Give up scanning for a surviving tree after this many indices.
const MAX_SCAN: i64 = 1 << 32;

fn survey_with<R: Rng + ?Sized>(r: usize, mut psi: impl FnMut(usize, i64) -> Result<i64>, rng: &mut R) -> Result<DualSurvey> {
    let mut image = |x: i64| -> Result<i64> {
        let mut y = x;
        for k in 0..r {
            y = psi(k, y)?;
        }
        Ok(y)
    };
    // Dual trees reaching level 0 are those of the points Ψ^r(x); Ψ^r(0) = 0.
    let mut i = 1;
    let mut left = image(1)?;
    let root_size = left;
    loop {
        let right = image(i + 1)?;
        if right > left {
            let k_r = right - left;
            let first_dual = if root_size > 0 { root_size } else { k_r };
            return Ok(DualSurvey { i_r: i, k_r, first_dual, j_r: rng.random_range(1..=first_dual) });
        }
        left = right;
        i += 1;
        if i > MAX_SCAN {
            return Err(Error::WindowTooSmall("no surviving tree found".into()));
        }
    }
}

/// Survey on an already sampled strip.
pub fn survey_duality<R: Rng + ?Sized>(strip: &StripForest, rng: &mut R) -> Result<DualSurvey> {
    survey_with(strip.height(), |k, x| strip.psi(k, x), rng)
}

/// Survey that samples missing bricks in place.
pub fn survey_duality_growing<R: Rng + ?Sized>(strip: &mut StripForest, rng: &mut R) -> Result<DualSurvey> {
    let r = strip.height();
    survey_with(r, |k, x| strip.psi_grow(k, x), rng)
}

/// The dual strip re-rooted at vertex `(J, r)`, rotated by a half turn and
/// shifted by ½, returned as a primal strip: its primal tree of node `i`
/// is the dual tree of old vertex `(J − i, r)`. A brick `(s, b, t, h)` of
/// old row `k` becomes `(J−t−h+1, h, J−s−b+1, b)` in new row `r−1−k`.
///
/// Only the sampled part of the old strip is carried over.
#[derive(Clone, Debug)]
pub struct RerootedDual {
    pub survey: DualSurvey,
    pub strip: StripForest,
}

pub fn reroot_dual(strip: &StripForest, survey: &DualSurvey) -> Result<RerootedDual> {
    let j = survey.j_r;
    let r = strip.height();
    let rows = (0..r)
        .map(|new_k| {
            let old = strip.row(r - 1 - new_k);
            let mut bricks: Vec<Brick> =
                old.bricks().map(|br| Brick { s: j - br.t - br.h + 1, b: br.h, t: j - br.s - br.b + 1, h: br.b }).collect();
            bricks.reverse();
            RowRealization::fixed(&bricks)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RerootedDual { survey: *survey, strip: StripForest::from_rows(&strip.law().transpose(), rows)? })
}

/// Surveys of `replicas` independent strips of height `r`.
pub fn survey_samples(law: &BrickLaw, r: usize, replicas: u64, seeds: SeedTree) -> Result<Vec<DualSurvey>> {
    parallel::collect(replicas, |idx| {
        let mut rng = seeds.rng(idx);
        let mut strip = StripForest::lazy(law, r, &mut rng)?;
        survey_duality_growing(&mut strip, &mut rng)
    })
}

/// Statistics of the trees `T_{-1}, T_0, T_1` of a strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFunctional {
    /// Constant 1.
    One,
    /// Height of `T_0`.
    RootHeight,
    /// Number of children of the root of `T_0`.
    RootChildren,
    /// `height(T_1) + 2·height(T_{-1})`; sensitive to left/right mix-ups.
    NeighbourHeights,
}

impl WindowFunctional {
    pub const ALL: [WindowFunctional; 4] =
        [WindowFunctional::One, WindowFunctional::RootHeight, WindowFunctional::RootChildren, WindowFunctional::NeighbourHeights];

    pub fn name(&self) -> &'static str {
        match self {
            WindowFunctional::One => "one",
            WindowFunctional::RootHeight => "root_height",
            WindowFunctional::RootChildren => "root_children",
            WindowFunctional::NeighbourHeights => "neighbour_heights",
        }
    }

    /// `trees` are `T_{-1}, T_0, T_1`.
    pub fn eval(&self, trees: &[PlaneTree; 3]) -> f64 {
        match self {
            WindowFunctional::One => 1.0,
            WindowFunctional::RootHeight => trees[1].height() as f64,
            WindowFunctional::RootChildren => trees[1].profile().get(1).copied().unwrap_or(0) as f64,
            WindowFunctional::NeighbourHeights => trees[2].height() as f64 + 2.0 * trees[0].height() as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci: (f64, f64),
}

impl SideEstimate {
    fn from_summary(s: &Summary, level: f64) -> Self {
        SideEstimate { mean: s.mean, std_err: s.std_err(), ci: s.mean_ci(level) }
    }
}

/// Both sides of the duality identity for one functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub functional: WindowFunctional,
    pub r: usize,
    /// `E[f(re-rooted dual of ρ)·K]`, `K` the first surviving dual index.
    pub lhs: SideEstimate,
    /// `E[f(primal of ᵗρ)·ᵗK_r]`.
    pub rhs: SideEstimate,
    pub overlap: bool,
}

fn window_trees(strip: &mut StripForest) -> Result<[PlaneTree; 3]> {
    Ok([strip.primal_tree_grow(-1)?, strip.primal_tree_grow(0)?, strip.primal_tree_grow(1)?])
}

/// One draw of `(f(F̃↓[ρ]), K)` for every functional, `K` the first surviving dual index.
pub(crate) fn dual_side<R: Rng + ?Sized>(
    law: &BrickLaw,
    r: usize,
    fs: &[WindowFunctional],
    rng: &mut R,
) -> Result<(Vec<f64>, i64)> {
    let mut strip = StripForest::lazy(law, r, rng)?;
    let survey = survey_duality_growing(&mut strip, rng)?;
    for d in -1..=1 {
        strip.dual_tree_grow(survey.j_r + d)?;
    }
    let rerooted = reroot_dual(&strip, &survey)?;
    let trees = [rerooted.strip.primal_tree(-1)?, rerooted.strip.primal_tree(0)?, rerooted.strip.primal_tree(1)?];
    Ok((fs.iter().map(|f| f.eval(&trees)).collect(), survey.first_dual))
}

/// One draw of `(f(F↑[ᵗρ]), ᵗK_r)` for every functional.
pub(crate) fn primal_side<R: Rng + ?Sized>(
    transposed: &BrickLaw,
    r: usize,
    fs: &[WindowFunctional],
    rng: &mut R,
) -> Result<(Vec<f64>, i64)> {
    let mut strip = StripForest::lazy(transposed, r, rng)?;
    let survey = survey_duality_growing(&mut strip, rng)?;
    let trees = window_trees(&mut strip)?;
    Ok((fs.iter().map(|f| f.eval(&trees)).collect(), survey.k_r))
}

/// Monte Carlo estimates of both sides of the duality identity, with
/// normal confidence intervals at `level`.
pub fn check_duality(
    law: &BrickLaw,
    r: usize,
    functionals: &[WindowFunctional],
    replicas: u64,
    seeds: SeedTree,
    level: f64,
) -> Result<Vec<DualityCheck>> {
    let transposed = law.transpose();
    let n = functionals.len();
    let side = |tag: u64, primal: bool| -> Result<Vec<Summary>> {
        let node = seeds.child(tag);
        parallel::reduce(
            replicas,
            || vec![Summary::new(); n],
            |acc, idx| {
                let mut rng = node.rng(idx);
                let (values, k) = if primal {
                    primal_side(&transposed, r, functionals, &mut rng)?
                } else {
                    dual_side(law, r, functionals, &mut rng)?
                };
                for (s, v) in acc.iter_mut().zip(values) {
                    s.push(v * k as f64);
                }
                Ok(())
            },
            |acc, part| acc.iter_mut().zip(&part).for_each(|(a, p)| a.merge(p)),
        )
    };
    let lhs = side(0, false)?;
    let rhs = side(1, true)?;
    Ok(functionals
        .iter()
        .zip(lhs.iter().zip(&rhs))
        .map(|(&functional, (l, rh))| {
            let lhs = SideEstimate::from_summary(l, level);
            let rhs = SideEstimate::from_summary(rh, level);
            DualityCheck { functional, r, lhs, rhs, overlap: intervals_overlap(lhs.ci, rhs.ci) }
        })
        .collect())
}
