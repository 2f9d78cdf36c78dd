use super::alias::AliasTable;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};

/// Sums of fewer than this many draws are done one by one.
const DIRECT_SUM: u64 = 32;

/// A finite law on positive integers.
#[derive(Clone, Debug)]
pub struct FiniteLaw {
    values: Vec<i64>,
    probs: Vec<f64>,
    alias: AliasTable,
}

impl FiniteLaw {
    /// `pairs` must have positive weights; they are normalised.
    pub(crate) fn new(pairs: &[(i64, f64)]) -> Self {
        let mut merged: Vec<(i64, f64)> = Vec::new();
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|p| p.0);
        for (v, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        let total: f64 = merged.iter().map(|p| p.1).sum();
        let values = merged.iter().map(|p| p.0).collect();
        let probs: Vec<f64> = merged.iter().map(|p| p.1 / total).collect();
        let alias = AliasTable::new(&probs);
        FiniteLaw { values, probs, alias }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn max_value(&self) -> i64 {
        *self.values.last().expect("non-empty law")
    }
}

/// Marginal law of the bottom or top of a brick.
#[derive(Clone, Debug)]
pub enum Marginal {
    Finite(FiniteLaw),
    /// `P(k) = q(1−q)^(k−1)` on `k ≥ 1`.
    Geometric {
        q: f64,
    },
    /// Size-biased geometric: `P(k) = k q²(1−q)^(k−1)`.
    SizeBiasedGeometric {
        q: f64,
    },
}

/// Raw moments `E[G^k]`, `k = 0..=4`, of the failure count `G` of a
/// geometric with success probability `q` (Eulerian-number formulas).
fn failure_moments(q: f64) -> [f64; 5] {
    let r = 1.0 - q;
    [
        1.0,
        r / q,
        r * (1.0 + r) / q.powi(2),
        r * (1.0 + 4.0 * r + r * r) / q.powi(3),
        r * (1.0 + 11.0 * r + 11.0 * r * r + r.powi(3)) / q.powi(4),
    ]
}

/// `E[(1+G)^k]` for `k = 0..=4`.
fn geometric_moments(q: f64) -> [f64; 5] {
    let g = failure_moments(q);
    const BINOM: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = (0..=k).map(|j| BINOM[k][j] * g[j]).sum();
    }
    out
}

fn sample_failures<R: Rng + ?Sized>(q: f64, rng: &mut R) -> i64 {
    if q >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / (-q).ln_1p()).floor() as i64
}

/// Multinomial split of `k` trials over `probs`, reported bin by bin.
pub(crate) fn multinomial<R: Rng + ?Sized>(k: u64, probs: &[f64], rng: &mut R, mut emit: impl FnMut(usize, u64)) {
    let mut left = k;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || p >= mass {
            emit(i, left);
            break;
        }
        let c = Binomial::new(left, (p / mass).clamp(0.0, 1.0)).expect("valid binomial").sample(rng);
        emit(i, c);
        left -= c;
        mass -= p;
    }
}

impl Marginal {
    pub fn finite(pairs: &[(i64, f64)]) -> Self {
        Marginal::Finite(FiniteLaw::new(pairs))
    }

    /// `E[X^k]` for `k ≤ 3`.
    pub fn moment(&self, k: u32) -> f64 {
        assert!(k <= 3);
        match self {
            Marginal::Finite(f) => f.atoms().map(|(v, p)| p * (v as f64).powi(k as i32)).sum(),
            Marginal::Geometric { q } => geometric_moments(*q)[k as usize],
            Marginal::SizeBiasedGeometric { q } => {
                let m = geometric_moments(*q);
                m[k as usize + 1] / m[1]
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn pmf(&self, v: i64) -> f64 {
        match self {
            Marginal::Finite(f) => f.atoms().find(|a| a.0 == v).map_or(0.0, |a| a.1),
            _ if v < 1 => 0.0,
            Marginal::Geometric { q } => q * (1.0 - q).powi((v - 1) as i32),
            Marginal::SizeBiasedGeometric { q } => v as f64 * q * q * (1.0 - q).powi((v - 1) as i32),
        }
    }

    /// Largest value, if the support is bounded.
    pub fn max_value(&self) -> Option<i64> {
        match self {
            Marginal::Finite(f) => Some(f.max_value()),
            Marginal::Geometric { q } | Marginal::SizeBiasedGeometric { q } => (*q >= 1.0).then_some(1),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Marginal::Finite(f) => f.values.len() == 1,
            Marginal::Geometric { q } | Marginal::SizeBiasedGeometric { q } => *q >= 1.0,
        }
    }

    /// Size-biased version `k P(k) / E[X]`.
    pub fn size_biased(&self) -> Option<Marginal> {
        match self {
            Marginal::Finite(f) => {
                let pairs: Vec<(i64, f64)> = f.atoms().map(|(v, p)| (v, v as f64 * p)).collect();
                Some(Marginal::finite(&pairs))
            }
            Marginal::Geometric { q } => Some(Marginal::SizeBiasedGeometric { q: *q }),
            Marginal::SizeBiasedGeometric { .. } => None,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            Marginal::Finite(f) => f.values[f.alias.sample(rng)],
            Marginal::Geometric { q } => 1 + sample_failures(*q, rng),
            Marginal::SizeBiasedGeometric { q } => 1 + sample_failures(*q, rng) + sample_failures(*q, rng),
        }
    }

    /// Sum of `k` independent draws.
    pub fn sum_of<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> i64 {
        if k < DIRECT_SUM {
            return (0..k).map(|_| self.sample(rng)).sum();
        }
        match self {
            Marginal::Finite(f) => {
                let mut total = 0i64;
                multinomial(k, &f.probs, rng, |i, c| total += f.values[i] * c as i64);
                total
            }
            Marginal::Geometric { q } => k as i64 + negative_binomial(k as f64, *q, rng),
            Marginal::SizeBiasedGeometric { q } => k as i64 + negative_binomial(2.0 * k as f64, *q, rng),
        }
    }
}

/// Failures before the `r`-th success, via the gamma–Poisson mixture.
fn negative_binomial<R: Rng + ?Sized>(r: f64, q: f64, rng: &mut R) -> i64 {
    if q >= 1.0 {
        return 0;
    }
    let lambda = Gamma::new(r, (1.0 - q) / q).expect("valid gamma").sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("valid poisson").sample(rng) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn series_moment(pmf: impl Fn(i64) -> f64, k: i32) -> f64 {
        (1..4000).map(|v| pmf(v) * (v as f64).powi(k)).sum()
    }

    #[test]
    fn closed_form_moments_match_series() {
        for &q in &[0.25, 0.5, 0.9] {
            for law in [Marginal::Geometric { q }, Marginal::SizeBiasedGeometric { q }] {
                assert_relative_eq!(series_moment(|v| law.pmf(v), 0), 1.0, max_relative = 1e-9);
                for k in 1..=3 {
                    assert_relative_eq!(law.moment(k as u32), series_moment(|v| law.pmf(v), k), max_relative = 1e-9);
                }
            }
        }
        // Hand values for q = 1/2: E[B] = 2, E[B²] = 6, E[B³] = 26.
        let g = Marginal::Geometric { q: 0.5 };
        assert_relative_eq!(g.moment(2), 6.0, max_relative = 1e-12);
        assert_relative_eq!(g.moment(3), 26.0, max_relative = 1e-12);
    }

    #[test]
    fn batched_sums_have_right_mean_and_variance() {
        let mut rng = crate::SimRng::seed_from_u64(9);
        let laws = [
            Marginal::finite(&[(1, 0.5), (3, 0.25), (4, 0.25)]),
            Marginal::Geometric { q: 0.3 },
            Marginal::SizeBiasedGeometric { q: 0.6 },
        ];
        for law in &laws {
            let k = 200u64;
            let (m1, m2) = (law.moment(1), law.moment(2));
            let s: crate::stats::Summary = (0..20_000).map(|_| law.sum_of(k, &mut rng) as f64).collect();
            let mean = k as f64 * m1;
            let var = k as f64 * (m2 - m1 * m1);
            assert!((s.mean - mean).abs() < 5.0 * (var / 20_000.0).sqrt(), "{law:?}");
            assert_relative_eq!(s.variance(), var, max_relative = 0.05);
        }
    }

    #[test]
    fn size_biasing_finite() {
        let b = Marginal::finite(&[(1, 0.5), (2, 0.5)]).size_biased().unwrap();
        assert_relative_eq!(b.pmf(1), 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(b.pmf(2), 2.0 / 3.0, max_relative = 1e-12);
    }
}
