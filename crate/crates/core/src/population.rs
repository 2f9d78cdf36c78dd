//! Multi-generation slice chains `M_k([x_0,x_1[), M_k([x_1,x_2[), …` and the
//! Monte Carlo statistics built on them.
//!
//! All chains run on the population-only stepper of [`row_flow`](crate::row_flow):
//! by shift invariance the slice populations form a Markov chain on their
//! own, so no coordinates need to be tracked. Every statistic takes a
//! [`SeedTree`] node and derives replica `i`'s generator from it; results are
//! reduced in replica order and do not depend on the thread count.

use crate::error::{Error, Result};
use crate::laws::BrickLaw;
use crate::parallel;
use crate::rng::SeedTree;
use crate::row_flow::step_into;
use crate::stats::{ks_one_sample, linear_fit, normal_cdf, PairSummary, Summary, TestResult};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// How one generation is sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// Exact batched sampling (sums of bricks drawn in bulk).
    #[default]
    Batched,
    /// One brick at a time. Slower, but the same generator stream gives the
    /// same bricks whatever the slice boundaries.
    Bricks,
}

/// Whether slices share rows of bricks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceMode {
    /// All slices see the same rows (the model).
    #[default]
    Joint,
    /// Each slice gets its own row every generation. Not the model: the
    /// slices become independent chains. Useful as a reference.
    Independent,
}

/// Stop as soon as some slice leaves the open strip `(lower, upper)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub lower: i64,
    pub upper: i64,
}

impl StopRule {
    /// The strip `(εn, n/ε)`.
    pub fn strip(n: i64, eps: f64) -> Self {
        StopRule { lower: (eps * n as f64).floor() as i64, upper: (n as f64 / eps).ceil() as i64 }
    }

    pub fn exits(&self, population: i64) -> bool {
        population <= self.lower || population >= self.upper
    }
}

/// A set of population values whose first entry time is recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitSet {
    AtLeast(i64),
    AtMost(i64),
}

impl HitSet {
    pub fn contains(&self, population: i64) -> bool {
        match *self {
            HitSet::AtLeast(x) => population >= x,
            HitSet::AtMost(x) => population <= x,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub stop: Option<StopRule>,
    pub hit_sets: Vec<HitSet>,
    pub step: StepMode,
    pub slices: SliceMode,
}

/// Trajectory of a tuple of slices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationPath {
    pub endpoints: Vec<i64>,
    /// `slices[k][i]` is slice `i` at generation `k`.
    pub slices: Vec<Vec<i64>>,
    /// First generation `k ≥ 1` at which each slice is 0; `None` if alive at
    /// the last recorded generation.
    pub extinction_times: Vec<Option<u64>>,
    /// `hitting_times[i][j]`: first generation slice `i` is in hit set `j`.
    pub hitting_times: Vec<Vec<Option<u64>>>,
    /// Generation at which the stop rule fired.
    pub stopped_at: Option<u64>,
}

impl PopulationPath {
    /// Index of the last recorded generation.
    pub fn last_generation(&self) -> u64 {
        self.slices.len() as u64 - 1
    }

    pub fn final_populations(&self) -> &[i64] {
        self.slices.last().expect("generation 0 is always recorded")
    }

    /// Population of slice `i` over time.
    pub fn slice(&self, i: usize) -> Vec<i64> {
        self.slices.iter().map(|g| g[i]).collect()
    }
}

/// Reusable one-generation stepper for a tuple of slices.
#[derive(Clone, Debug)]
pub struct SliceChain {
    pops: Vec<i64>,
    next: Vec<i64>,
    step: StepMode,
    slices: SliceMode,
}

impl SliceChain {
    pub fn new(initial: &[i64], step: StepMode, slices: SliceMode) -> Self {
        SliceChain { pops: initial.to_vec(), next: vec![0; initial.len()], step, slices }
    }

    pub fn populations(&self) -> &[i64] {
        &self.pops
    }

    pub fn is_extinct(&self) -> bool {
        self.pops.iter().all(|&p| p == 0)
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, law: &BrickLaw, rng: &mut R) {
        let batched = self.step == StepMode::Batched;
        match self.slices {
            SliceMode::Joint => step_into(law, &self.pops, &mut self.next, batched, rng),
            SliceMode::Independent => {
                for i in 0..self.pops.len() {
                    step_into(law, &self.pops[i..=i], &mut self.next[i..=i], batched, rng);
                }
            }
        }
        std::mem::swap(&mut self.pops, &mut self.next);
    }
}

/// Iterate the slice chain of `[x_0,x_1[, [x_1,x_2[, …` up to `horizon`
/// generations, or until every slice is extinct, or until the stop rule
/// fires.
pub fn run_slices<R: Rng + ?Sized>(
    law: &BrickLaw,
    endpoints: &[i64],
    horizon: u64,
    options: &RunOptions,
    rng: &mut R,
) -> Result<PopulationPath> {
    if endpoints.len() < 2 || endpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("endpoints must be strictly increasing, at least two".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let initial: Vec<i64> = endpoints.windows(2).map(|w| w[1] - w[0]).collect();
    let m = initial.len();
    let mut chain = SliceChain::new(&initial, options.step, options.slices);
    let mut path = PopulationPath {
        endpoints: endpoints.to_vec(),
        slices: vec![initial.clone()],
        extinction_times: vec![None; m],
        hitting_times: vec![vec![None; options.hit_sets.len()]; m],
        stopped_at: None,
    };
    let record_hits = |path: &mut PopulationPath, k: u64, pops: &[i64]| {
        for (i, &p) in pops.iter().enumerate() {
            for (j, set) in options.hit_sets.iter().enumerate() {
                if path.hitting_times[i][j].is_none() && set.contains(p) {
                    path.hitting_times[i][j] = Some(k);
                }
            }
        }
    };
    record_hits(&mut path, 0, &initial);
    if options.stop.is_some_and(|s| initial.iter().any(|&p| s.exits(p))) {
        path.stopped_at = Some(0);
        return Ok(path);
    }
    for k in 1..=horizon {
        chain.advance(law, rng);
        let pops = chain.populations().to_vec();
        for (i, &p) in pops.iter().enumerate() {
            if p == 0 && path.extinction_times[i].is_none() {
                path.extinction_times[i] = Some(k);
            }
        }
        record_hits(&mut path, k, &pops);
        path.slices.push(pops);
        if options.stop.is_some_and(|s| chain.populations().iter().any(|&p| s.exits(p))) {
            path.stopped_at = Some(k);
            break;
        }
        if chain.is_extinct() {
            break;
        }
    }
    Ok(path)
}

/// Independent runs of [`run_slices`], replica `i` drawing from `seeds.rng(i)`.
pub fn simulate_paths(
    law: &BrickLaw,
    endpoints: &[i64],
    horizon: u64,
    options: &RunOptions,
    replicas: u64,
    seeds: SeedTree,
) -> Result<Vec<PopulationPath>> {
    parallel::collect(replicas, |idx| run_slices(law, endpoints, horizon, options, &mut seeds.rng(idx)))
}

/// Metadata written at the top of a CSV path dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvMeta {
    pub law: String,
    pub seed: u64,
    pub horizon: u64,
}

/// Write paths as `replica,generation,slice_index,population`, preceded by
/// `#`-prefixed metadata lines.
pub fn write_paths_csv<W: Write>(paths: &[PopulationPath], meta: &CsvMeta, mut out: W) -> Result<()> {
    writeln!(out, "# law: {}", meta.law)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# horizon: {}", meta.horizon)?;
    writeln!(out, "replica,generation,slice_index,population")?;
    for (r, path) in paths.iter().enumerate() {
        for (k, gen) in path.slices.iter().enumerate() {
            for (i, p) in gen.iter().enumerate() {
                writeln!(out, "{r},{k},{i},{p}")?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Single-slice helpers

fn single_step<R: Rng + ?Sized>(law: &BrickLaw, pop: i64, mode: StepMode, rng: &mut R) -> i64 {
    let mut out = [0i64];
    step_into(law, &[pop], &mut out, mode == StepMode::Batched, rng);
    out[0]
}

/// Population after `generations` steps from `n0` (stops early at 0).
fn population_after<R: Rng + ?Sized>(law: &BrickLaw, n0: i64, generations: u64, rng: &mut R) -> i64 {
    let mut p = n0;
    for _ in 0..generations {
        if p == 0 {
            break;
        }
        p = single_step(law, p, StepMode::Batched, rng);
    }
    p
}

/// `M_k([0, n0[)` for `replicas` independent chains, in replica order.
pub fn populations_at(law: &BrickLaw, n0: i64, generation: u64, replicas: u64, seeds: SeedTree) -> Result<Vec<i64>> {
    parallel::collect(replicas, |idx| Ok(population_after(law, n0, generation, &mut seeds.rng(idx))))
}

/// Extinction time of `[0, n0[`, `None` if still alive after `horizon`.
pub fn extinction_times(law: &BrickLaw, n0: i64, horizon: u64, replicas: u64, seeds: SeedTree) -> Result<Vec<Option<u64>>> {
    parallel::collect(replicas, |idx| {
        let mut rng = seeds.rng(idx);
        let mut p = n0;
        for k in 1..=horizon {
            p = single_step(law, p, StepMode::Batched, &mut rng);
            if p == 0 {
                return Ok(Some(k));
            }
        }
        Ok(None)
    })
}

// ---------------------------------------------------------------------------
// One-step statistics

/// Moments of one generation from `n` individuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneStepStats {
    pub n: i64,
    /// `M₁/n`.
    pub mean: Summary,
    /// `(M₁ − n)²/n`, whose mean is `Var(M₁)/n`.
    pub variance: Summary,
    /// `√n·(√M₁ − √n) − (M₁ − n)/2`: the square-root drift with the
    /// mean-zero control variate `(M₁ − n)/(2√n)` removed, scaled by `√n`.
    pub sqrt_drift: Summary,
}

#[derive(Clone, Copy, Default)]
struct OneStepAcc {
    mean: Summary,
    variance: Summary,
    sqrt_drift: Summary,
}

pub fn one_step_stats(law: &BrickLaw, n: i64, replicas: u64, seeds: SeedTree) -> Result<OneStepStats> {
    let nf = n as f64;
    let acc = parallel::reduce(
        replicas,
        OneStepAcc::default,
        |acc, idx| {
            let m = single_step(law, n, StepMode::Batched, &mut seeds.rng(idx)) as f64;
            acc.mean.push(m / nf);
            acc.variance.push((m - nf).powi(2) / nf);
            // √n(√m − √n) − (m − n)/2 = −√n(√m − √n)²/(2√n) = −(√m − √n)²/2
            acc.sqrt_drift.push(-(m.sqrt() - nf.sqrt()).powi(2) / 2.0);
            Ok(())
        },
        |acc, part| {
            acc.mean.merge(&part.mean);
            acc.variance.merge(&part.variance);
            acc.sqrt_drift.merge(&part.sqrt_drift);
        },
    )?;
    Ok(OneStepStats { n, mean: acc.mean, variance: acc.variance, sqrt_drift: acc.sqrt_drift })
}

/// Uniform jitter on `[−½, ½)` that turns an integer into a continuous value
/// with the same mean.
fn jitter<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() - 0.5
}

/// `(M₁ − n + d(U − ½))/√n` for `replicas` chains, `d` the lattice span
/// of the law. A jitter narrower than `d` would leave a ripple of order
/// `d/√n` in the CDF, since `M₁ − n` mod `d` only depends on the end bricks.
pub fn one_step_clt_sample(law: &BrickLaw, n: i64, replicas: u64, seeds: SeedTree) -> Result<Vec<f64>> {
    let nf = n as f64;
    let d = law.lattice_span() as f64;
    parallel::collect(replicas, |idx| {
        let mut rng = seeds.rng(idx);
        let m = single_step(law, n, StepMode::Batched, &mut rng) as f64;
        Ok((m - nf + d * jitter(&mut rng)) / nf.sqrt())
    })
}

/// Adjacent slices `[0,n[`, `[n,2n[` after `generations` steps, recorded
/// as `((M − n)/√n, (M' − n)/√n)` so the covariance is `Cov/n`.
pub fn slice_covariance(law: &BrickLaw, n: i64, generations: u64, replicas: u64, seeds: SeedTree) -> Result<PairSummary> {
    let scale = (n as f64).sqrt();
    parallel::reduce(
        replicas,
        PairSummary::default,
        |acc, idx| {
            let mut rng = seeds.rng(idx);
            let mut chain = SliceChain::new(&[n, n], StepMode::Batched, SliceMode::Joint);
            for _ in 0..generations {
                if chain.is_extinct() {
                    break;
                }
                chain.advance(law, &mut rng);
            }
            let p = chain.populations();
            acc.push((p[0] - n) as f64 / scale, (p[1] - n) as f64 / scale);
            Ok(())
        },
        |acc, part| acc.merge(&part),
    )
}

/// Checks of the three hypotheses of the Feller convergence theorem on a
/// grid of initial sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm12Report {
    pub n_grid: Vec<i64>,
    /// Mean of `(M₁ − n)²` per grid point.
    pub second_moments: Vec<Summary>,
    /// OLS slope of `E[(ΔA)²]` against `n`.
    pub slope: f64,
    pub slope_ratio: f64,
    /// Smallest `E[(ΔA)²]` on the grid.
    pub floor: f64,
    /// KS of the jittered `ΔA/√n` against `N(0, σ²)` at the largest `n`.
    pub ks: TestResult,
    pub slope_ok: bool,
    pub floor_ok: bool,
    pub ks_ok: bool,
}

impl Thm12Report {
    pub fn pass(&self) -> bool {
        self.slope_ok && self.floor_ok && self.ks_ok
    }
}

pub fn verify_thm12_hypotheses(
    law: &BrickLaw,
    n_grid: &[i64],
    replicas: u64,
    significance: f64,
    seeds: SeedTree,
) -> Result<Thm12Report> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 1 {
        return Err(Error::InvalidArgument("n_grid must be positive and increasing".into()));
    }
    let sigma_sq = law.sigma_sq();
    let mut second_moments = Vec::new();
    for (i, &n) in n_grid.iter().enumerate() {
        let s = one_step_stats(law, n, replicas, seeds.child(i as u64))?;
        // (M − n)²/n → (M − n)²
        second_moments.push(rescale(s.variance, n as f64));
    }
    let xs: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = second_moments.iter().map(|s| s.mean).collect();
    let (slope, _) = if xs.len() > 1 { linear_fit(&xs, &ys) } else { (ys[0] / xs[0], 0.0) };
    let floor = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let largest = *n_grid.last().unwrap();
    let sample = one_step_clt_sample(law, largest, replicas, seeds.named("ks"))?;
    let sd = sigma_sq.sqrt();
    let ks = ks_one_sample(&sample, |x| normal_cdf(x / sd))?;
    let slope_ratio = slope / sigma_sq;
    Ok(Thm12Report {
        n_grid: n_grid.to_vec(),
        second_moments,
        slope,
        slope_ratio,
        floor,
        ks,
        slope_ok: (0.95..=1.05).contains(&slope_ratio),
        floor_ok: floor > 0.0,
        ks_ok: ks.p_value > significance,
    })
}

/// Multiply every observation of a summary by `c`.
fn rescale(s: Summary, c: f64) -> Summary {
    let mut out = s;
    out.scale(c);
    out
}

// ---------------------------------------------------------------------------
// Survival, Yaglom, tails

/// `n·P(τ₀ ≥ n)` for a single initial individual, against `2/σ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovEstimate {
    pub n: u64,
    pub survivors: u64,
    pub replicas: u64,
    pub estimate: f64,
    pub ci: (f64, f64),
    pub target: f64,
}

pub fn kolmogorov_estimate(law: &BrickLaw, n: u64, replicas: u64, level: f64, seeds: SeedTree) -> Result<KolmogorovEstimate> {
    // τ₀ ≥ n  ⇔  M_{n−1} > 0
    let survivors = parallel::reduce(
        replicas,
        || 0u64,
        |acc, idx| {
            *acc += (population_after(law, 1, n - 1, &mut seeds.rng(idx)) > 0) as u64;
            Ok(())
        },
        |acc, part| *acc += part,
    )?;
    let (lo, hi) = crate::stats::wilson_interval(survivors, replicas, level);
    let nf = n as f64;
    Ok(KolmogorovEstimate {
        n,
        survivors,
        replicas,
        estimate: nf * survivors as f64 / replicas as f64,
        ci: (nf * lo, nf * hi),
        target: 2.0 / law.sigma_sq(),
    })
}

/// `M_n([0,1[)/n` conditioned on `M_n > 0`, by rejection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YaglomSample {
    pub n: u64,
    pub replicas: u64,
    pub survivors: u64,
    /// `(M_n − U)/n` over survivors, `U` uniform on `[0,1)`.
    pub conditional: Vec<f64>,
    /// `M_n` over all replicas; its mean is 1 by the martingale property.
    pub unconditional: Summary,
}

impl YaglomSample {
    pub fn survival_frequency(&self) -> f64 {
        self.survivors as f64 / self.replicas as f64
    }
}

pub fn yaglom_statistics(law: &BrickLaw, n: u64, replicas: u64, seeds: SeedTree) -> Result<YaglomSample> {
    let nf = n as f64;
    let draws = parallel::collect(replicas, |idx| {
        let mut rng = seeds.rng(idx);
        let m = population_after(law, 1, n, &mut rng);
        Ok((m, (m > 0).then(|| (m as f64 - rng.random::<f64>()) / nf)))
    })?;
    let unconditional = draws.iter().map(|&(m, _)| m as f64).collect();
    let conditional: Vec<f64> = draws.iter().filter_map(|&(_, c)| c).collect();
    Ok(YaglomSample { n, replicas, survivors: conditional.len() as u64, conditional, unconditional })
}

/// `P(A_{jn} ≤ n for all j ≤ J, A_{Jn} > 0)` from `x` individuals, as a
/// function of `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongThinTail {
    pub x: i64,
    pub n: i64,
    pub replicas: u64,
    /// `successes[J]` for `J = 0..=k_max`.
    pub successes: Vec<u64>,
}

impl LongThinTail {
    pub fn probability(&self, j: usize) -> f64 {
        self.successes[j] as f64 / self.replicas as f64
    }

    /// Fitted exponential decay rate `(ln P(j₀) − ln P(j₁))/(j₁ − j₀)`.
    pub fn decay_rate(&self, j0: usize, j1: usize) -> Option<f64> {
        let (p0, p1) = (self.probability(j0), self.probability(j1));
        (p0 > 0.0 && p1 > 0.0).then(|| (p0.ln() - p1.ln()) / (j1 - j0) as f64)
    }
}

pub fn long_thin_tail(law: &BrickLaw, x: i64, n: i64, k_max: usize, replicas: u64, seeds: SeedTree) -> Result<LongThinTail> {
    if !(1..=n).contains(&x) {
        return Err(Error::InvalidArgument(format!("need 1 <= x <= n, got x = {x}, n = {n}")));
    }
    let successes = parallel::reduce(
        replicas,
        || vec![0u64; k_max + 1],
        |acc, idx| {
            let mut rng = seeds.rng(idx);
            let mut p = x;
            acc[0] += 1;
            for slot in acc.iter_mut().skip(1) {
                p = population_after(law, p, n as u64, &mut rng);
                if p == 0 || p > n {
                    break;
                }
                *slot += 1;
            }
            Ok(())
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    )?;
    Ok(LongThinTail { x, n, replicas, successes })
}

/// Frequency of reaching `x` or more from `k` within `horizon` generations.
pub fn doob_frequency(law: &BrickLaw, k: i64, x: i64, horizon: u64, replicas: u64, seeds: SeedTree) -> Result<u64> {
    parallel::reduce(
        replicas,
        || 0u64,
        |acc, idx| {
            let mut rng = seeds.rng(idx);
            let mut p = k;
            for _ in 0..horizon {
                if p >= x {
                    *acc += 1;
                    return Ok(());
                }
                if p == 0 {
                    return Ok(());
                }
                p = single_step(law, p, StepMode::Batched, &mut rng);
            }
            *acc += (p >= x) as u64;
            Ok(())
        },
        |acc, part| *acc += part,
    )
}

// ---------------------------------------------------------------------------
// Tree sizes

/// Histogram of the total size of the primal tree of one node, with bins
/// `1..=cap` and a last bin for larger trees.
pub fn tree_size_counts(law: &BrickLaw, cap: u64, replicas: u64, seeds: SeedTree) -> Result<Vec<u64>> {
    parallel::reduce(
        replicas,
        || vec![0u64; cap as usize + 1],
        |acc, idx| {
            let mut rng = seeds.rng(idx);
            let (mut p, mut total) = (1i64, 1u64);
            while p > 0 && total <= cap {
                p = single_step(law, p, StepMode::Bricks, &mut rng);
                total += p as u64;
            }
            acc[(total.min(cap + 1) - 1) as usize] += 1;
            Ok(())
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    )
}

/// Same histogram for a Galton–Watson tree simulated directly from its
/// offspring law `[(k, p_k)]`.
pub fn bgw_tree_size_counts(offspring: &[(u32, f64)], cap: u64, replicas: u64, seeds: SeedTree) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(offspring.iter().map(|&(_, p)| p))
        .map_err(|e| Error::InvalidArgument(format!("offspring law: {e}")))?;
    parallel::reduce(
        replicas,
        || vec![0u64; cap as usize + 1],
        |acc, idx| {
            let mut rng = seeds.rng(idx);
            // Depth-first: `pending` individuals still to reproduce.
            let (mut pending, mut total) = (1u64, 1u64);
            while pending > 0 && total <= cap {
                let children = offspring[dist.sample(&mut rng)].0 as u64;
                pending = pending - 1 + children;
                total += children;
            }
            acc[(total.min(cap + 1) - 1) as usize] += 1;
            Ok(())
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    )
}

#[cfg(test)]
mod tests;
