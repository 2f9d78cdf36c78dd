//! Rows of bricks and the one-generation endpoint flow.
//!
//! Coordinates: node `x` of a level sits at abscissa `x + ½`, vertex `v` at
//! abscissa `v`. A brick with bottom `[s, s+b)` and top `[t, t+h)` removes
//! nodes `s..s+b` of its level and creates nodes `t..t+h` of the next one.
//! All of the new nodes are children of the bottom-right node `s+b−1`.
//!
//! A row is stationary: the brick covering a reference node is drawn from
//! the size-biased law `ρ*` and the reference sits uniformly inside it; the
//! other bricks are i.i.d. `ρ`. Rows here are anchored so that the covering
//! brick has its top-left vertex at the reference abscissa, hence the flow
//! map `Ψ` fixes the anchor.

use crate::error::{Error, Result};
use crate::laws::BrickLaw;
use crate::rng::SimRng;
use rand::{Rng, RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Coordinates are kept within this bound so that sums never overflow.
const COORD_LIMIT: i64 = 1 << 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Brick {
    /// Left end of the bottom.
    pub s: i64,
    /// Bottom width.
    pub b: i64,
    /// Left end of the top.
    pub t: i64,
    /// Top width.
    pub h: i64,
}

impl Brick {
    pub fn bottom_end(&self) -> i64 {
        self.s + self.b
    }

    pub fn top_end(&self) -> i64 {
        self.t + self.h
    }

    /// The node whose children are the top of this brick.
    pub fn bottom_right(&self) -> i64 {
        self.s + self.b - 1
    }
}

fn checked(v: i64) -> Result<i64> {
    if v.abs() < COORD_LIMIT {
        Ok(v)
    } else {
        Err(Error::Overflow("extending a row"))
    }
}

/// One row of the wall, sampled lazily outwards from its root brick.
#[derive(Clone, Debug)]
pub struct RowRealization {
    anchor: i64,
    offset: i64,
    /// `right[0]` is the root brick, then bricks to its right.
    right: Vec<Brick>,
    /// Bricks to the left of the root, nearest first.
    left: Vec<Brick>,
    streams: Option<(SimRng, SimRng)>,
}

impl RowRealization {
    /// Stationary row whose root brick covers node `anchor` and has its
    /// top-left vertex at `anchor`.
    pub fn sample<R: Rng + ?Sized>(law: &BrickLaw, anchor: i64, rng: &mut R) -> Self {
        let (b, h) = law.sample_biased(rng);
        let offset = rng.random_range(0..b);
        let right_seed = rng.next_u64();
        let left_seed = rng.next_u64();
        RowRealization {
            anchor,
            offset,
            right: vec![Brick { s: anchor - offset, b, t: anchor, h }],
            left: Vec::new(),
            streams: Some((SimRng::seed_from_u64(right_seed), SimRng::seed_from_u64(left_seed))),
        }
    }

    /// Row with a prescribed root brick and offset; the rest of the row is
    /// sampled from `seed`.
    pub fn with_root(anchor: i64, root: (i64, i64), offset: i64, seed: u64) -> Result<Self> {
        let (b, h) = root;
        if b < 1 || h < 1 || !(0..b).contains(&offset) {
            return Err(Error::InvalidArgument(format!("bad root {root:?} with offset {offset}")));
        }
        let mut rng = SimRng::seed_from_u64(seed);
        let (right_seed, left_seed) = (rng.next_u64(), rng.next_u64());
        Ok(RowRealization {
            anchor,
            offset,
            right: vec![Brick { s: anchor - offset, b, t: anchor, h }],
            left: Vec::new(),
            streams: Some((SimRng::seed_from_u64(right_seed), SimRng::seed_from_u64(left_seed))),
        })
    }

    /// A fixed, finite row. `bricks` must be contiguous on both sides;
    /// the first brick is used as the root. Lookups outside fail with
    /// [`Error::WindowTooSmall`].
    pub fn fixed(bricks: &[Brick]) -> Result<Self> {
        let first = *bricks.first().ok_or_else(|| Error::InvalidArgument("empty row".into()))?;
        for w in bricks.windows(2) {
            if w[1].s != w[0].bottom_end() || w[1].t != w[0].top_end() {
                return Err(Error::InvalidArgument(format!("bricks {:?} and {:?} are not adjacent", w[0], w[1])));
            }
        }
        if bricks.iter().any(|br| br.b < 1 || br.h < 1) {
            return Err(Error::InvalidArgument("bricks need positive widths".into()));
        }
        Ok(RowRealization { anchor: first.t, offset: 0, right: bricks.to_vec(), left: Vec::new(), streams: None })
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    /// Position of the anchor inside the root bottom.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn root(&self) -> Brick {
        self.right[0]
    }

    /// All sampled bricks, left to right.
    pub fn bricks(&self) -> impl Iterator<Item = Brick> + '_ {
        self.left.iter().rev().chain(self.right.iter()).copied()
    }

    /// Nodes `[lo, hi)` of the lower level covered so far.
    pub fn bottom_span(&self) -> (i64, i64) {
        let lo = self.left.last().unwrap_or(&self.right[0]).s;
        (lo, self.right.last().expect("root").bottom_end())
    }

    /// Nodes `[lo, hi)` of the upper level covered so far.
    pub fn top_span(&self) -> (i64, i64) {
        let lo = self.left.last().unwrap_or(&self.right[0]).t;
        (lo, self.right.last().expect("root").top_end())
    }

    fn grow_right(&mut self, law: &BrickLaw) -> Result<()> {
        let (rng, _) = self.streams.as_mut().ok_or_else(|| Error::WindowTooSmall("fixed row exhausted on the right".into()))?;
        let last = *self.right.last().expect("root");
        let (b, h) = law.sample(rng);
        self.right.push(Brick { s: checked(last.bottom_end())?, b, t: checked(last.top_end())?, h });
        Ok(())
    }

    fn grow_left(&mut self, law: &BrickLaw) -> Result<()> {
        let (_, rng) = self.streams.as_mut().ok_or_else(|| Error::WindowTooSmall("fixed row exhausted on the left".into()))?;
        let first = *self.left.last().unwrap_or(&self.right[0]);
        let (b, h) = law.sample(rng);
        self.left.push(Brick { s: checked(first.s - b)?, b, t: checked(first.t - h)?, h });
        Ok(())
    }

    /// Sample until nodes `[lo, hi)` of the lower level are covered.
    pub fn cover_bottom(&mut self, law: &BrickLaw, lo: i64, hi: i64) -> Result<()> {
        while self.right.last().expect("root").bottom_end() < hi {
            self.grow_right(law)?;
        }
        while self.bottom_span().0 > lo {
            self.grow_left(law)?;
        }
        Ok(())
    }

    /// Sample until nodes `[lo, hi)` of the upper level are covered.
    pub fn cover_top(&mut self, law: &BrickLaw, lo: i64, hi: i64) -> Result<()> {
        while self.right.last().expect("root").top_end() < hi {
            self.grow_right(law)?;
        }
        while self.top_span().0 > lo {
            self.grow_left(law)?;
        }
        Ok(())
    }

    /// The brick whose bottom contains node `x`, if sampled.
    pub fn brick_at_bottom(&self, x: i64) -> Option<Brick> {
        let root = self.right[0];
        let br = if x >= root.s {
            let i = self.right.partition_point(|br| br.s <= x);
            self.right[i - 1]
        } else {
            let i = self.left.partition_point(|br| br.s > x);
            *self.left.get(i)?
        };
        (x < br.bottom_end()).then_some(br)
    }

    /// The brick whose top contains node `y`, if sampled.
    pub fn brick_at_top(&self, y: i64) -> Option<Brick> {
        let root = self.right[0];
        let br = if y >= root.t {
            let i = self.right.partition_point(|br| br.t <= y);
            self.right[i - 1]
        } else {
            let i = self.left.partition_point(|br| br.t > y);
            *self.left.get(i)?
        };
        (y < br.top_end()).then_some(br)
    }

    /// Flow map: `Ψ(x)` is the top-left vertex of the brick covering node
    /// `x`. Descendants of nodes `[a, b)` are `[Ψ(a), Ψ(b))`.
    pub fn psi(&self, x: i64) -> Result<i64> {
        self.brick_at_bottom(x).map(|br| br.t).ok_or_else(|| Error::WindowTooSmall(format!("node {x} outside the sampled row")))
    }

    /// Dual flow map: `Φ(u)` is the bottom-left vertex of the first brick
    /// whose top-left vertex is `≥ u`. Dual descendants of vertices
    /// `[u, w)` are `[Φ(u), Φ(w))`.
    pub fn phi(&self, u: i64) -> Result<i64> {
        self.brick_at_top(u)
            .map(|br| if br.t == u { br.s } else { br.bottom_end() })
            .ok_or_else(|| Error::WindowTooSmall(format!("vertex {u} outside the sampled row")))
    }

    pub fn psi_grow(&mut self, law: &BrickLaw, x: i64) -> Result<i64> {
        self.cover_bottom(law, x, x + 1)?;
        self.psi(x)
    }

    pub fn phi_grow(&mut self, law: &BrickLaw, u: i64) -> Result<i64> {
        self.cover_top(law, u, u + 1)?;
        self.phi(u)
    }
}

/// Endpoints `x_1 ≤ … ≤ x_m` of consecutive slices at some generation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowState {
    pub generation: u64,
    endpoints: Vec<i64>,
}

impl FlowState {
    /// Initial state: at least two strictly increasing endpoints.
    pub fn new(endpoints: Vec<i64>) -> Result<Self> {
        if endpoints.len() < 2 {
            return Err(Error::InvalidArgument("need at least two endpoints".into()));
        }
        if endpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("endpoints must be strictly increasing".into()));
        }
        Ok(FlowState { generation: 0, endpoints })
    }

    pub fn endpoints(&self) -> &[i64] {
        &self.endpoints
    }

    /// Slice populations `x_{i+1} − x_i`.
    pub fn populations(&self) -> Vec<i64> {
        self.endpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total(&self) -> i64 {
        self.endpoints[self.endpoints.len() - 1] - self.endpoints[0]
    }

    /// Which slices still have individuals.
    pub fn alive(&self) -> Vec<bool> {
        self.populations().iter().map(|&p| p > 0).collect()
    }

    /// Push the endpoints through an already sampled row.
    pub fn through_row(&self, row: &RowRealization) -> Result<FlowState> {
        let endpoints = self.endpoints.iter().map(|&x| row.psi(x)).collect::<Result<Vec<_>>>()?;
        Ok(FlowState { generation: self.generation + 1, endpoints })
    }
}

/// Minimal stationary row covering nodes `leftmost..=rightmost`, anchored
/// at `leftmost`.
pub fn sample_row_over<R: Rng + ?Sized>(law: &BrickLaw, leftmost: i64, rightmost: i64, rng: &mut R) -> Result<RowRealization> {
    if leftmost > rightmost {
        return Err(Error::InvalidArgument(format!("empty span [{leftmost}, {rightmost}]")));
    }
    let mut row = RowRealization::sample(law, leftmost, rng);
    row.cover_bottom(law, leftmost, rightmost + 1)?;
    Ok(row)
}

/// One generation of the flow: sample a row anchored at `x_1`, extend it
/// over `[x_1, x_m]` and map every endpoint through `Ψ`.
pub fn flow_step<R: Rng + ?Sized>(state: &FlowState, law: &BrickLaw, rng: &mut R) -> Result<FlowState> {
    let ends = state.endpoints();
    let row = sample_row_over(law, ends[0], ends[ends.len() - 1], rng)?;
    state.through_row(&row)
}

/// Batches of fewer bricks than this are sampled one by one.
const MIN_BATCH: u64 = 16;

/// Next-generation slice populations given current ones.
///
/// Equal in law to [`flow_step`] but does not materialise the row: runs
/// of bricks that surely end inside the current slice are drawn as one
/// multinomial sum, and a geometric bottom is handled by thinning (right
/// ends of bricks then form a Bernoulli process).
pub fn step_populations<R: Rng + ?Sized>(law: &BrickLaw, populations: &[i64], rng: &mut R) -> Vec<i64> {
    let mut out = vec![0; populations.len()];
    step_into(law, populations, &mut out, true, rng);
    out
}

/// Same as [`step_populations`] but strictly brick by brick.
pub fn step_populations_bricks<R: Rng + ?Sized>(law: &BrickLaw, populations: &[i64], rng: &mut R) -> Vec<i64> {
    let mut out = vec![0; populations.len()];
    step_into(law, populations, &mut out, false, rng);
    out
}

pub(crate) fn step_into<R: Rng + ?Sized>(law: &BrickLaw, pops: &[i64], out: &mut [i64], batched: bool, rng: &mut R) {
    out.iter_mut().for_each(|o| *o = 0);
    if pops.iter().all(|&p| p == 0) {
        return;
    }
    if batched {
        if let (Some(q), crate::laws::JointLaw::Product { top, .. }) = (law.geometric_bottom(), law.joint()) {
            for (o, &p) in out.iter_mut().zip(pops) {
                if p > 0 {
                    let k = rand_distr::Binomial::new(p as u64, q).expect("valid binomial");
                    *o = top.sum_of(rand_distr::Distribution::sample(&k, rng), rng);
                }
            }
            return;
        }
    }
    let bmax = if batched { law.max_bottom() } else { None };
    // `cursor` is the right end of the last brick; slice i is (x_i, x_{i+1}].
    let (b, h) = law.sample_biased(rng);
    let mut cursor = b - rng.random_range(0..b);
    let mut i = 0usize;
    let mut upper = pops[0];
    let mut pending = h;
    loop {
        while cursor > upper {
            i += 1;
            if i == pops.len() {
                return;
            }
            upper += pops[i];
        }
        out[i] += pending;
        if let Some(bmax) = bmax {
            let k = ((upper - cursor) / bmax) as u64;
            if k >= MIN_BATCH {
                // Every right end of the batch stays within the slice.
                let (sb, sh) = law.sum_of(k, rng);
                cursor += sb;
                out[i] += sh;
                pending = 0;
                continue;
            }
        }
        let (b, h) = law.sample(rng);
        cursor += b;
        pending = h;
    }
}

/// Population of a single slice of `n` individuals after one generation.
pub fn one_step_population<R: Rng + ?Sized>(law: &BrickLaw, n: i64, rng: &mut R) -> i64 {
    step_populations(law, &[n], rng)[0]
}

#[cfg(test)]
mod tests;
