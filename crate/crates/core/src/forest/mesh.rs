//! Meshing subforests and their distance to the full forest.
//!
//! The mesh nodes of step `m` are the nodes `(i·m + ½, j·m)`. The meshing
//! is the subforest spanned by them, i.e. the mesh nodes and all their
//! ancestors; both forests are grafted on the baseline (level 0). Since the
//! meshing is closed under ancestors, the closest point of the meshing to a
//! node is its first spanned ancestor, or the baseline: the distance obeys
//! `d(node) = 0` if spanned or at level 0, else `d(parent) + 1`.
//!
//! Mesh nodes above the strip top are not seen, so a node counts as spanned
//! only through mesh nodes inside the strip; distances are therefore upper
//! bounds.

use super::StripForest;
use crate::error::{Error, Result};
use crate::laws::BrickLaw;
use crate::rng::SeedTree;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
struct LevelMask {
    lo: i64,
    bits: Vec<bool>,
}

impl LevelMask {
    fn get(&self, x: i64) -> Option<bool> {
        let i = x - self.lo;
        (0..self.bits.len() as i64).contains(&i).then(|| self.bits[i as usize])
    }
}

#[derive(Clone, Debug)]
pub struct MeshForest {
    pub mesh_step: i64,
    levels: Vec<LevelMask>,
    /// Nodes with children outside the sampled part of the strip.
    pub incomplete: u64,
}

impl MeshForest {
    /// Whether node `x` of level `k` is spanned; `None` if not sampled.
    pub fn spanned(&self, k: usize, x: i64) -> Option<bool> {
        self.levels.get(k)?.get(x)
    }

    pub fn spanned_count(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.iter().filter(|&&b| b).count() as u64).sum()
    }

    pub fn node_count(&self) -> u64 {
        self.levels.iter().map(|l| l.bits.len() as u64).sum()
    }

    fn is_mesh(&self, k: usize, x: i64) -> bool {
        k as i64 % self.mesh_step == 0 && x.rem_euclid(self.mesh_step) == 0
    }
}

/// Sampled nodes of each level: the bottom span of row `k`, and the top
/// span of the last row for level `r`.
fn level_spans(strip: &StripForest) -> Vec<(i64, i64)> {
    let r = strip.height();
    let mut spans: Vec<(i64, i64)> = (0..r).map(|k| strip.row(k).bottom_span()).collect();
    spans.push(strip.row(r - 1).top_span());
    spans
}

pub fn mesh_subforest(strip: &StripForest, mesh_step: i64) -> Result<MeshForest> {
    if mesh_step < 1 {
        return Err(Error::InvalidArgument("mesh step must be positive".into()));
    }
    let spans = level_spans(strip);
    let r = strip.height();
    let mut mesh = MeshForest { mesh_step, levels: Vec::with_capacity(r + 1), incomplete: 0 };
    let mut masks: Vec<LevelMask> =
        spans.iter().map(|&(lo, hi)| LevelMask { lo, bits: vec![false; (hi - lo) as usize] }).collect();
    for (k, mask) in masks.iter_mut().enumerate() {
        for (i, bit) in mask.bits.iter_mut().enumerate() {
            *bit = mesh.is_mesh(k, mask.lo + i as i64);
        }
    }
    for k in (0..r).rev() {
        let (upper, lower) = {
            let (a, b) = masks.split_at_mut(k + 1);
            (&b[0], &mut a[k])
        };
        for br in strip.row(k).bricks() {
            let x = br.bottom_right();
            let Some(i) = (x - lower.lo).try_into().ok().filter(|&i: &usize| i < lower.bits.len()) else {
                continue;
            };
            if lower.bits[i] {
                continue;
            }
            let mut any = false;
            for y in br.t..br.top_end() {
                match upper.get(y) {
                    Some(true) => {
                        any = true;
                        break;
                    }
                    Some(false) => {}
                    None => mesh.incomplete += 1,
                }
            }
            lower.bits[i] = any;
        }
    }
    mesh.levels = masks;
    Ok(mesh)
}

/// Distance of the ball to the meshing, plus the horizontal extent of the
/// ball (largest `|x|` over its nodes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub distance: i64,
    pub box_extent: i64,
    pub ball_nodes: u64,
}

/// Largest distance from a node of the ball of `radius` around the root
/// `(½, 0)` (distance `|a| + k` for a node of level `k` in the tree of
/// root `a`) to the meshing. Fails with `WindowTooSmall` if the strip
/// does not contain the whole ball.
pub fn hausdorff_to_mesh(strip: &StripForest, mesh: &MeshForest, radius: i64) -> Result<i64> {
    Ok(mesh_summary(strip, mesh, radius)?.distance)
}

pub fn mesh_summary(strip: &StripForest, mesh: &MeshForest, radius: i64) -> Result<MeshSummary> {
    if radius < 0 {
        return Err(Error::InvalidArgument("negative radius".into()));
    }
    let r = strip.height();
    let top = (radius as usize).min(r);
    // The ball lives in the trees of roots -radius..=radius.
    let spans = level_spans(strip);
    let mut need = (-radius, radius + 1);
    for (k, &(lo, hi)) in spans.iter().enumerate().take(top + 1) {
        if need.0 < need.1 && (need.0 < lo || need.1 > hi) {
            return Err(Error::WindowTooSmall(format!("ball of radius {radius} leaves the strip at level {k}")));
        }
        if k < top && need.0 < need.1 {
            need = strip.descendants(k, need.0, need.1, k + 1)?;
        }
    }
    // Forward pass: root index and distance of every node descended from the ball roots.
    let mut nodes: Vec<(i64, i64, i64)> = (-radius..=radius).map(|a| (a, a, 0)).collect();
    let mut summary = MeshSummary { distance: 0, box_extent: 0, ball_nodes: 0 };
    for k in 0..=top {
        for &(x, root, dist) in &nodes {
            if root.abs() + k as i64 <= radius {
                summary.ball_nodes += 1;
                summary.distance = summary.distance.max(dist);
                summary.box_extent = summary.box_extent.max(x.abs());
            }
        }
        if k == top {
            break;
        }
        let mut next = Vec::with_capacity(nodes.len());
        for &(x, root, dist) in &nodes {
            if root.abs() + k as i64 >= radius {
                continue;
            }
            for y in strip.primal_children(k, x)? {
                let spanned = mesh.spanned(k + 1, y).unwrap_or(false);
                next.push((y, root, if spanned { 0 } else { dist + 1 }));
            }
        }
        nodes = next;
    }
    Ok(summary)
}

/// Distances to the meshing of steps `steps` of the ball of `radius`
/// around the root, one strip per replica (shared by all steps). The strip
/// reaches `radius + max(steps)` so that every ball node has a mesh level
/// above it.
pub fn mesh_distances(law: &BrickLaw, radius: i64, steps: &[i64], replicas: u64, seeds: SeedTree) -> Result<Vec<Vec<i64>>> {
    let height = (radius + steps.iter().copied().max().unwrap_or(1)) as usize;
    // Strips are large; run replicas one after the other.
    (0..replicas)
        .map(|idx| {
            let strip = StripForest::ball(law, radius, height, &mut seeds.rng(idx))?;
            steps.iter().map(|&m| hausdorff_to_mesh(&strip, &mesh_subforest(&strip, m)?, radius)).collect()
        })
        .collect()
}
