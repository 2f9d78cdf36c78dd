//! Finite strips of the wall with their primal and dual forests.
//!
//! Level `k` of a strip of height `r` has nodes (individuals) at abscissae
//! `x + ½` and vertices at integer abscissae. Row `k` (for `0 ≤ k < r`)
//! sits between levels `k` and `k+1`. Every row is anchored at 0, so the
//! root node `(½, 0)` always has its covering brick's top-left at 0.
//!
//! Primal edges go up: the bottom-right node of a brick is the parent of
//! its top nodes. Dual edges go down: the top-left vertex of a brick is the
//! parent of its bottom vertices except the right-most. With the flow maps
//! of [`RowRealization`], the primal parent of node `y` is the bottom-right
//! of the brick covering `y` on top, and the dual parent of vertex `u` is
//! `Ψ(u)`.

mod export;
mod mesh;
mod survey;

pub use mesh::{hausdorff_to_mesh, mesh_distances, mesh_subforest, mesh_summary, MeshForest, MeshSummary};
pub use survey::{
    check_duality, reroot_dual, survey_duality, survey_duality_growing, survey_samples, DualSurvey, DualityCheck, RerootedDual,
    SideEstimate, WindowFunctional,
};

use crate::error::{Error, Result};
use crate::laws::BrickLaw;
use crate::parallel;
use crate::rng::SeedTree;
use crate::row_flow::{flow_step, Brick, FlowState, RowRealization};
use rand::Rng;
use std::ops::Range;

/// A strip of `r` rows.
#[derive(Clone, Debug)]
pub struct StripForest {
    law: BrickLaw,
    rows: Vec<RowRealization>,
}

/// A tree cut out of a strip, stored level by level in plane order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTree {
    levels: Vec<Vec<TreeNode>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Abscissa index in the strip the tree was read from.
    pub position: i64,
    /// Index of the parent in the previous level.
    pub parent: Option<usize>,
}

impl PlaneTree {
    pub(crate) fn from_levels(levels: Vec<Vec<TreeNode>>) -> Self {
        let mut levels = levels;
        while levels.len() > 1 && levels.last().is_some_and(|l| l.is_empty()) {
            levels.pop();
        }
        PlaneTree { levels }
    }

    pub fn levels(&self) -> &[Vec<TreeNode>] {
        &self.levels
    }

    /// Number of nodes per level.
    pub fn profile(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    /// Largest level reached (0 for a lone root).
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn size(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    /// Graph distance between two nodes given as `(level, index)`.
    pub fn distance(&self, a: (usize, usize), b: (usize, usize)) -> usize {
        let (mut a, mut b) = (a, b);
        let mut d = 0;
        while a.0 > b.0 {
            a = (a.0 - 1, self.levels[a.0][a.1].parent.expect("non-root"));
            d += 1;
        }
        while b.0 > a.0 {
            b = (b.0 - 1, self.levels[b.0][b.1].parent.expect("non-root"));
            d += 1;
        }
        while a != b {
            a = (a.0 - 1, self.levels[a.0][a.1].parent.expect("common root"));
            b = (b.0 - 1, self.levels[b.0][b.1].parent.expect("common root"));
            d += 2;
        }
        d
    }
}

/// Growth policy for lookups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Grow {
    No,
    Yes,
}

impl StripForest {
    /// Rows with only their root bricks sampled; everything else is
    /// sampled on demand by the `*_grow` methods. Rows are drawn from `rng`
    /// in order, each consuming the same draws as a [`crate::flow_step`]
    /// call anchored at 0.
    pub fn lazy<R: Rng + ?Sized>(law: &BrickLaw, r: usize, rng: &mut R) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("strip height must be at least 1".into()));
        }
        let rows = (0..r).map(|_| RowRealization::sample(law, 0, rng)).collect();
        Ok(StripForest { law: law.clone(), rows })
    }

    /// Strip whose rows cover nodes `window` on both of their levels.
    pub fn build<R: Rng + ?Sized>(law: &BrickLaw, r: usize, window: Range<i64>, rng: &mut R) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::InvalidArgument("empty window".into()));
        }
        let mut strip = Self::lazy(law, r, rng)?;
        for row in &mut strip.rows {
            row.cover_bottom(law, window.start, window.end)?;
            row.cover_top(law, window.start, window.end)?;
        }
        Ok(strip)
    }

    /// Strip containing the trees of the roots `-radius..=radius` up to
    /// level `height`: row `k` covers all level-`k` descendants of those
    /// roots (and the node right after them).
    pub fn ball<R: Rng + ?Sized>(law: &BrickLaw, radius: i64, height: usize, rng: &mut R) -> Result<Self> {
        let mut strip = Self::lazy(law, height, rng)?;
        let (mut lo, mut hi) = (-radius, radius + 1);
        for k in 0..height {
            strip.rows[k].cover_bottom(law, lo, hi + 1)?;
            (lo, hi) = (strip.rows[k].psi(lo)?, strip.rows[k].psi(hi)?);
        }
        Ok(strip)
    }

    /// Strip from given rows (e.g. fixed rows for hand-checked examples).
    pub fn from_rows(law: &BrickLaw, rows: Vec<RowRealization>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("strip height must be at least 1".into()));
        }
        Ok(StripForest { law: law.clone(), rows })
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn law(&self) -> &BrickLaw {
        &self.law
    }

    pub fn row(&self, k: usize) -> &RowRealization {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[RowRealization] {
        &self.rows
    }

    fn check_row(&self, k: usize) -> Result<()> {
        if k < self.rows.len() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("row {k} outside a strip of height {}", self.rows.len())))
        }
    }

    /// Extend row `k` so that nodes `[lo, hi)` of level `k` are covered.
    pub fn cover_bottom(&mut self, k: usize, lo: i64, hi: i64) -> Result<()> {
        self.check_row(k)?;
        self.rows[k].cover_bottom(&self.law, lo, hi)
    }

    /// Extend row `k` so that nodes `[lo, hi)` of level `k+1` are covered.
    pub fn cover_top(&mut self, k: usize, lo: i64, hi: i64) -> Result<()> {
        self.check_row(k)?;
        self.rows[k].cover_top(&self.law, lo, hi)
    }

    pub(crate) fn brick_below(&mut self, k: usize, x: i64, grow: Grow) -> Result<Brick> {
        self.check_row(k)?;
        if grow == Grow::Yes {
            self.rows[k].cover_bottom(&self.law, x, x + 1)?;
        }
        self.rows[k].brick_at_bottom(x).ok_or_else(|| Error::WindowTooSmall(format!("node {x} of level {k} not sampled")))
    }

    pub(crate) fn brick_above(&mut self, k: usize, y: i64, grow: Grow) -> Result<Brick> {
        self.check_row(k)?;
        if grow == Grow::Yes {
            self.rows[k].cover_top(&self.law, y, y + 1)?;
        }
        self.rows[k].brick_at_top(y).ok_or_else(|| Error::WindowTooSmall(format!("node {y} of level {} not sampled", k + 1)))
    }

    /// Flow map of row `k`, level `k` → level `k+1`.
    pub fn psi(&self, k: usize, x: i64) -> Result<i64> {
        self.check_row(k)?;
        self.rows[k].psi(x)
    }

    pub fn psi_grow(&mut self, k: usize, x: i64) -> Result<i64> {
        Ok(self.brick_below(k, x, Grow::Yes)?.t)
    }

    /// Dual flow map of row `k`, vertices of level `k+1` → level `k`.
    pub fn phi(&self, k: usize, u: i64) -> Result<i64> {
        self.check_row(k)?;
        self.rows[k].phi(u)
    }

    pub fn phi_grow(&mut self, k: usize, u: i64) -> Result<i64> {
        let br = self.brick_above(k, u, Grow::Yes)?;
        Ok(if br.t == u { br.s } else { br.bottom_end() })
    }

    /// Nodes of level `to` descended from nodes `[a, b)` of level `from`.
    pub fn descendants(&self, from: usize, a: i64, b: i64, to: usize) -> Result<(i64, i64)> {
        let (mut a, mut b) = (a, b);
        for k in from..to {
            if a < b {
                (a, b) = (self.psi(k, a)?, self.psi(k, b)?);
            }
        }
        Ok((a, b))
    }

    pub fn descendants_grow(&mut self, from: usize, a: i64, b: i64, to: usize) -> Result<(i64, i64)> {
        let (mut a, mut b) = (a, b);
        for k in from..to {
            if a < b {
                (a, b) = (self.psi_grow(k, a)?, self.psi_grow(k, b)?);
            }
        }
        Ok((a, b))
    }

    /// Primal children (nodes of level `k+1`) of node `x` of level `k`.
    pub fn primal_children(&self, k: usize, x: i64) -> Result<Range<i64>> {
        self.check_row(k)?;
        let br =
            self.rows[k].brick_at_bottom(x).ok_or_else(|| Error::WindowTooSmall(format!("node {x} of level {k} not sampled")))?;
        Ok(if br.bottom_right() == x { br.t..br.top_end() } else { 0..0 })
    }

    pub(crate) fn primal_children_with(&mut self, k: usize, x: i64, grow: Grow) -> Result<Range<i64>> {
        if grow == Grow::No {
            return self.primal_children(k, x);
        }
        let br = self.brick_below(k, x, grow)?;
        Ok(if br.bottom_right() == x { br.t..br.top_end() } else { 0..0 })
    }

    /// Primal parent (node of level `k`) of node `y` of level `k+1`.
    pub fn primal_parent(&self, k: usize, y: i64) -> Result<i64> {
        self.check_row(k)?;
        self.rows[k]
            .brick_at_top(y)
            .map(|br| br.bottom_right())
            .ok_or_else(|| Error::WindowTooSmall(format!("node {y} of level {} not sampled", k + 1)))
    }

    /// Dual children (vertices of level `k`) of vertex `v` of level `k+1`.
    pub fn dual_children(&self, k: usize, v: i64) -> Result<Range<i64>> {
        Ok(self.phi(k, v)?..self.phi(k, v + 1)?)
    }

    pub(crate) fn dual_children_with(&mut self, k: usize, v: i64, grow: Grow) -> Result<Range<i64>> {
        if grow == Grow::Yes {
            Ok(self.phi_grow(k, v)?..self.phi_grow(k, v + 1)?)
        } else {
            self.dual_children(k, v)
        }
    }

    /// Dual parent (vertex of level `k+1`) of vertex `u` of level `k`.
    pub fn dual_parent(&self, k: usize, u: i64) -> Result<i64> {
        self.psi(k, u)
    }

    /// Primal tree of node `(i + ½, 0)`, cut at the strip top.
    pub fn primal_tree(&self, i: i64) -> Result<PlaneTree> {
        grow_tree(i, self.height(), |k, x| self.primal_children(k, x))
    }

    pub fn primal_tree_grow(&mut self, i: i64) -> Result<PlaneTree> {
        grow_tree(i, self.height(), |k, x| self.primal_children_with(k, x, Grow::Yes))
    }

    /// Dual tree of vertex `(v, r)`, read downwards: level `ℓ` of the
    /// returned tree holds vertices of strip level `r − ℓ`.
    pub fn dual_tree(&self, v: i64) -> Result<PlaneTree> {
        let r = self.height();
        grow_tree(v, r, |depth, u| self.dual_children(r - 1 - depth, u))
    }

    pub fn dual_tree_grow(&mut self, v: i64) -> Result<PlaneTree> {
        let r = self.height();
        grow_tree(v, r, |depth, u| self.dual_children_with(r - 1 - depth, u, Grow::Yes))
    }

    /// Populations of the slices `[x_i, x_{i+1})` at every level, counted
    /// by walking primal child lists (independently of the flow maps).
    pub fn slice_populations(&mut self, endpoints: &[i64], grow: bool) -> Result<Vec<Vec<i64>>> {
        let grow = if grow { Grow::Yes } else { Grow::No };
        let mut slices: Vec<Vec<i64>> = endpoints.windows(2).map(|w| (w[0]..w[1]).collect()).collect();
        let mut out = vec![slices.iter().map(|s| s.len() as i64).collect::<Vec<_>>()];
        for k in 0..self.height() {
            for slice in &mut slices {
                let mut next = Vec::new();
                for &x in slice.iter() {
                    next.extend(self.primal_children_with(k, x, grow)?);
                }
                *slice = next;
            }
            out.push(slices.iter().map(|s| s.len() as i64).collect());
        }
        Ok(out)
    }
}

/// Number of realizations, out of `replicas`, where the slice populations
/// of a [`StripForest::build`] strip over nodes `0..window` differ from the
/// [`crate::flow_step`] chain run on the same generator stream. Heights are
/// drawn in `1..=max_height` and cut points in `1..window`.
pub fn flow_strip_mismatches(law: &BrickLaw, window: i64, max_height: usize, replicas: u64, seeds: SeedTree) -> Result<u64> {
    if window < 2 || max_height == 0 {
        return Err(Error::InvalidArgument("need window >= 2 and max_height >= 1".into()));
    }
    parallel::reduce(
        replicas,
        || 0u64,
        |acc, idx| {
            let node = seeds.child(idx);
            let mut setup = node.rng(0);
            let r = setup.random_range(1..=max_height);
            let mut ends: Vec<i64> = (1..window).filter(|_| setup.random_bool(0.3)).collect();
            ends.insert(0, 0);
            ends.push(window);
            let mut state = FlowState::new(ends.clone())?;
            let mut rng = node.rng(1);
            let mut flow = vec![state.populations()];
            for _ in 0..r {
                state = flow_step(&state, law, &mut rng)?;
                flow.push(state.populations());
            }
            let mut strip = StripForest::build(law, r, 0..window, &mut node.rng(1))?;
            *acc += (strip.slice_populations(&ends, true)? != flow) as u64;
            Ok(())
        },
        |acc, part| *acc += part,
    )
}

/// Breadth-first tree of at most `depth` generations.
fn grow_tree(root: i64, depth: usize, mut children: impl FnMut(usize, i64) -> Result<Range<i64>>) -> Result<PlaneTree> {
    let mut levels = vec![vec![TreeNode { position: root, parent: None }]];
    for d in 0..depth {
        let mut next = Vec::new();
        for (idx, node) in levels[d].iter().enumerate() {
            for y in children(d, node.position)? {
                next.push(TreeNode { position: y, parent: Some(idx) });
            }
        }
        let done = next.is_empty();
        levels.push(next);
        if done {
            break;
        }
    }
    Ok(PlaneTree::from_levels(levels))
}

#[cfg(test)]
mod tests;
