//! Brick laws.
//!
//! A brick law is a law of `(B, H)` on positive integers; `B` is the bottom
//! width (individuals removed), `H` the top width (individuals created).
//! Laws are either finite joint tables or products of marginals; the
//! product form carries the Galton–Watson embedding, whose bottom is
//! geometric.

mod alias;
mod marginal;
mod probability;

pub use marginal::{FiniteLaw, Marginal};
pub use probability::Probability;

use crate::error::{Error, Result};
use alias::AliasTable;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::fmt;
use std::sync::Arc;

const FLOAT_TOL: f64 = 1e-9;

/// Finite joint table of `(b, h)` atoms.
#[derive(Clone, Debug)]
pub struct FiniteJoint {
    atoms: Vec<(i64, i64)>,
    probs: Vec<f64>,
    alias: AliasTable,
}

impl FiniteJoint {
    fn new(pairs: &[((i64, i64), f64)]) -> Self {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let atoms = pairs.iter().map(|p| p.0).collect();
        let probs: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
        let alias = AliasTable::new(&probs);
        FiniteJoint { atoms, probs, alias }
    }

    pub fn atoms(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    fn expect(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.atoms().map(|((b, h), p)| p * f(b as f64, h as f64)).sum()
    }
}

/// A joint law of `(B, H)`, not necessarily critical.
#[derive(Clone, Debug)]
pub enum JointLaw {
    Finite(FiniteJoint),
    Product { bottom: Marginal, top: Marginal },
}

impl JointLaw {
    pub fn finite(pairs: &[((i64, i64), f64)]) -> Self {
        JointLaw::Finite(FiniteJoint::new(pairs))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        match self {
            JointLaw::Finite(f) => f.atoms[f.alias.sample(rng)],
            JointLaw::Product { bottom, top } => (bottom.sample(rng), top.sample(rng)),
        }
    }

    /// Componentwise sum of `k` independent bricks.
    pub fn sum_of<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> (i64, i64) {
        match self {
            JointLaw::Finite(f) if k >= 32 => {
                let (mut sb, mut sh) = (0i64, 0i64);
                marginal::multinomial(k, &f.probs, rng, |i, c| {
                    sb += f.atoms[i].0 * c as i64;
                    sh += f.atoms[i].1 * c as i64;
                });
                (sb, sh)
            }
            JointLaw::Finite(_) => (0..k).fold((0, 0), |(sb, sh), _| {
                let (b, h) = self.sample(rng);
                (sb + b, sh + h)
            }),
            JointLaw::Product { bottom, top } => (bottom.sum_of(k, rng), top.sum_of(k, rng)),
        }
    }

    pub fn bottom_marginal(&self) -> Marginal {
        match self {
            JointLaw::Finite(f) => Marginal::finite(&f.atoms().map(|((b, _), p)| (b, p)).collect::<Vec<_>>()),
            JointLaw::Product { bottom, .. } => bottom.clone(),
        }
    }

    pub fn top_marginal(&self) -> Marginal {
        match self {
            JointLaw::Finite(f) => Marginal::finite(&f.atoms().map(|((_, h), p)| (h, p)).collect::<Vec<_>>()),
            JointLaw::Product { top, .. } => top.clone(),
        }
    }

    /// Span of the lattice carrying one-generation increments `M₁ − n`,
    /// up to the two bricks at the slice ends.
    pub fn lattice_span(&self) -> i64 {
        let span = match self {
            JointLaw::Finite(f) => {
                let d0 = f.atoms[0].1 - f.atoms[0].0;
                f.atoms.iter().fold(0, |g, &(b, h)| gcd(g, h - b - d0))
            }
            // Galton–Watson form: M₁ is a sum of top values.
            JointLaw::Product { bottom: Marginal::Geometric { .. }, top: Marginal::Finite(t) } => {
                t.atoms().filter(|a| a.1 > 0.0).fold(0, |g, (h, _)| gcd(g, h))
            }
            JointLaw::Product { .. } => 1,
        };
        span.max(1)
    }

    pub fn max_bottom(&self) -> Option<i64> {
        match self {
            JointLaw::Finite(f) => f.atoms.iter().map(|a| a.0).max(),
            JointLaw::Product { bottom, .. } => bottom.max_value(),
        }
    }

    pub fn mean_bottom(&self) -> f64 {
        match self {
            JointLaw::Finite(f) => f.expect(|b, _| b),
            JointLaw::Product { bottom, .. } => bottom.mean(),
        }
    }

    pub fn mean_top(&self) -> f64 {
        match self {
            JointLaw::Finite(f) => f.expect(|_, h| h),
            JointLaw::Product { top, .. } => top.mean(),
        }
    }

    /// `E[B H]`.
    pub fn mean_product(&self) -> f64 {
        match self {
            JointLaw::Finite(f) => f.expect(|b, h| b * h),
            JointLaw::Product { bottom, top } => bottom.mean() * top.mean(),
        }
    }

    /// `E[(H − B)²]`.
    pub fn mean_sq_difference(&self) -> f64 {
        match self {
            JointLaw::Finite(f) => f.expect(|b, h| (h - b) * (h - b)),
            JointLaw::Product { bottom, top } => top.moment(2) - 2.0 * top.mean() * bottom.mean() + bottom.moment(2),
        }
    }

    /// `P(B = b, H = h)`.
    pub fn pmf(&self, b: i64, h: i64) -> f64 {
        match self {
            JointLaw::Finite(f) => f.atoms().filter(|a| a.0 == (b, h)).map(|a| a.1).sum(),
            JointLaw::Product { bottom, top } => bottom.pmf(b) * top.pmf(h),
        }
    }

    pub fn transpose(&self) -> JointLaw {
        match self {
            JointLaw::Finite(f) => JointLaw::finite(&f.atoms().map(|((b, h), p)| ((h, b), p)).collect::<Vec<_>>()),
            JointLaw::Product { bottom, top } => JointLaw::Product { bottom: top.clone(), top: bottom.clone() },
        }
    }

    /// The law `b ρ(b, h) / E[B]`.
    pub fn bottom_size_biased(&self) -> JointLaw {
        match self {
            JointLaw::Finite(f) => JointLaw::finite(&f.atoms().map(|((b, h), p)| ((b, h), b as f64 * p)).collect::<Vec<_>>()),
            JointLaw::Product { bottom, top } => {
                JointLaw::Product { bottom: bottom.size_biased().expect("bottom marginal admits size-biasing"), top: top.clone() }
            }
        }
    }

    fn is_degenerate(&self) -> bool {
        match self {
            JointLaw::Finite(f) => f.atoms.iter().all(|(b, h)| b == h),
            JointLaw::Product { bottom, top } => {
                bottom.is_deterministic() && top.is_deterministic() && bottom.mean() == top.mean()
            }
        }
    }
}

/// Size-biased companions of a brick law.
#[derive(Clone, Debug)]
pub struct BiasedLaws {
    /// `ρ*(b, h) = b ρ(b, h) / Z`: the brick covering a fixed node.
    pub rho_star: JointLaw,
    /// `β*(b) = b β(b) / Z`.
    pub beta_star: Marginal,
    /// `η*(h) = Σ_b b ρ(b, h) / Z`: top of the brick covering a fixed node.
    pub eta_star: Marginal,
}

#[derive(Debug)]
struct Inner {
    law: JointLaw,
    biased: BiasedLaws,
    z: f64,
    sigma_sq: f64,
    exact_z: Option<BigRational>,
    exact_sigma_sq: Option<BigRational>,
    label: String,
}

/// A validated brick law. Cheap to clone.
#[derive(Clone, Debug)]
pub struct BrickLaw(Arc<Inner>);

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational_label(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn check_total(total: &BigRational, exact: bool) -> Result<()> {
    let t = ratio_to_f64(total);
    let ok = if exact { total.is_one() } else { (t - 1.0).abs() <= FLOAT_TOL };
    if ok {
        Ok(())
    } else {
        Err(Error::NotAProbability(t))
    }
}

fn check_critical(eb: &BigRational, eh: &BigRational, exact: bool) -> Result<()> {
    let (b, h) = (ratio_to_f64(eb), ratio_to_f64(eh));
    let ok = if exact { eb == eh } else { (b - h).abs() <= FLOAT_TOL * b.max(h) };
    if ok {
        Ok(())
    } else {
        Err(Error::NotCritical { mean_bottom: b, mean_top: h })
    }
}

fn collect_probabilities<K: Clone + Ord>(items: &[(K, Probability)]) -> Result<(Vec<(K, BigRational)>, bool)> {
    if items.is_empty() {
        return Err(Error::NotAProbability(0.0));
    }
    let mut exact = true;
    let mut out: Vec<(K, BigRational)> = Vec::new();
    for (k, p) in items {
        exact &= p.is_exact();
        let r = p.to_rational()?;
        if r.is_negative() {
            return Err(Error::InvalidAtom(format!("negative probability {p}")));
        }
        if r.is_zero() {
            continue;
        }
        out.push((k.clone(), r));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.dedup_by(|later, earlier| {
        if later.0 == earlier.0 {
            earlier.1 = &earlier.1 + &later.1;
            true
        } else {
            false
        }
    });
    Ok((out, exact))
}

impl BrickLaw {
    /// Validated finite law from `((b, h), p)` atoms.
    pub fn from_atoms(atoms: &[((i64, i64), Probability)]) -> Result<Self> {
        Self::build_finite(atoms, true)
    }

    /// Convenience wrapper for float probabilities.
    pub fn from_float_atoms(atoms: &[((i64, i64), f64)]) -> Result<Self> {
        let atoms: Vec<_> = atoms.iter().map(|&(a, p)| (a, Probability::from(p))).collect();
        Self::from_atoms(&atoms)
    }

    /// Like [`from_atoms`](Self::from_atoms) but without the criticality and
    /// non-degeneracy checks. Useful for fixtures such as the deterministic
    /// `(1, 1)` wall.
    pub fn from_atoms_unchecked(atoms: &[((i64, i64), Probability)]) -> Result<Self> {
        Self::build_finite(atoms, false)
    }

    fn build_finite(atoms: &[((i64, i64), Probability)], checked: bool) -> Result<Self> {
        let (atoms, exact) = collect_probabilities(atoms)?;
        for &((b, h), _) in &atoms {
            if b < 1 || h < 1 {
                return Err(Error::InvalidAtom(format!("({b}, {h}) must have positive widths")));
            }
        }
        let total: BigRational = atoms.iter().map(|a| a.1.clone()).sum();
        check_total(&total, exact)?;
        let moment = |f: &dyn Fn(i64, i64) -> i64| -> BigRational {
            atoms.iter().map(|((b, h), p)| p * BigRational::from_integer(BigInt::from(f(*b, *h)))).sum::<BigRational>() / &total
        };
        let eb = moment(&|b, _| b);
        let eh = moment(&|_, h| h);
        let diff = moment(&|b, h| (h - b) * (h - b));
        if checked {
            check_critical(&eb, &eh, exact)?;
            if atoms.iter().all(|((b, h), _)| b == h) {
                return Err(Error::Degenerate);
            }
        }
        let sigma_sq = &diff / &eb;
        let label = format!(
            "atoms{{{}}}",
            atoms
                .iter()
                .map(|((b, h), p)| format!("({b},{h}):{}", if exact { rational_label(p) } else { ratio_to_f64(p).to_string() }))
                .collect::<Vec<_>>()
                .join(",")
        );
        let pairs: Vec<((i64, i64), f64)> = atoms.iter().map(|(a, p)| (*a, ratio_to_f64(p))).collect();
        let law = JointLaw::finite(&pairs);
        Ok(Self::assemble(law, label, exact.then(|| eb.clone()), exact.then_some(sigma_sq)))
    }

    /// Brick law whose primal forest is a critical Galton–Watson forest with
    /// offspring law `p`: bottom geometric with success `1 − p(0)`, top
    /// `p` conditioned to be positive. Then `σ² = Var(p)`.
    pub fn from_bgw(offspring: &[(u32, Probability)]) -> Result<Self> {
        let (p, exact) = collect_probabilities(offspring)?;
        let total: BigRational = p.iter().map(|a| a.1.clone()).sum();
        check_total(&total, exact)?;
        let p0 = p.iter().find(|a| a.0 == 0).map(|a| a.1.clone() / &total).unwrap_or_else(BigRational::zero);
        if p0.is_zero() {
            return Err(Error::ZeroP0);
        }
        let q = BigRational::one() - &p0;
        if q.is_zero() {
            return Err(Error::Degenerate);
        }
        let kth = |k: u32| -> BigRational {
            p.iter().map(|(j, pj)| pj * BigRational::from_integer(BigInt::from(*j).pow(k))).sum::<BigRational>() / &total
        };
        let mean = kth(1);
        check_critical(&mean, &BigRational::one(), exact)?;
        let var = kth(2) - &mean * &mean;
        let qf = ratio_to_f64(&q);
        let top: Vec<(i64, f64)> = p.iter().filter(|a| a.0 > 0).map(|(j, pj)| (*j as i64, ratio_to_f64(pj))).collect();
        let law = JointLaw::Product { bottom: Marginal::Geometric { q: qf }, top: Marginal::finite(&top) };
        let label = format!(
            "bgw{{{}}}",
            p.iter()
                .map(|(j, pj)| format!("{j}:{}", if exact { rational_label(pj) } else { ratio_to_f64(pj).to_string() }))
                .collect::<Vec<_>>()
                .join(",")
        );
        let z = BigRational::one() / &q;
        Ok(Self::assemble(law, label, exact.then_some(z), exact.then_some(var)))
    }

    /// Discretised continuous-time branching law; see [`ContinuousTimeLaw`].
    pub fn from_continuous_time(mu: &[(i64, Probability)], nu: &[(i64, Probability)], n: u64) -> Result<Self> {
        ContinuousTimeLaw::new(mu, nu, n)?.brick_law()
    }

    fn assemble(law: JointLaw, label: String, exact_z: Option<BigRational>, exact_sigma_sq: Option<BigRational>) -> Self {
        let z = law.mean_bottom();
        let sigma_sq = law.mean_sq_difference() / z;
        let rho_star = law.bottom_size_biased();
        let beta_star = rho_star.bottom_marginal();
        let eta_star = rho_star.top_marginal();
        BrickLaw(Arc::new(Inner {
            law,
            biased: BiasedLaws { rho_star, beta_star, eta_star },
            z,
            sigma_sq,
            exact_z,
            exact_sigma_sq,
            label,
        }))
    }

    /// The law of `(H, B)`.
    pub fn transpose(&self) -> BrickLaw {
        let law = self.0.law.transpose();
        let label = format!("transpose({})", self.0.label);
        Self::assemble(law, label, self.0.exact_z.clone(), self.0.exact_sigma_sq.clone())
    }

    pub fn size_biased(&self) -> &BiasedLaws {
        &self.0.biased
    }

    pub fn joint(&self) -> &JointLaw {
        &self.0.law
    }

    /// `Z = E[B] = E[H]`.
    pub fn z(&self) -> f64 {
        self.0.z
    }

    /// `σ² = E[(H − B)²] / Z`.
    pub fn sigma_sq(&self) -> f64 {
        self.0.sigma_sq
    }

    pub fn exact_z(&self) -> Option<&BigRational> {
        self.0.exact_z.as_ref()
    }

    pub fn exact_sigma_sq(&self) -> Option<&BigRational> {
        self.0.exact_sigma_sq.as_ref()
    }

    pub fn mean_product(&self) -> f64 {
        self.0.law.mean_product()
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// Whether every brick satisfies `B = H`.
    pub fn is_degenerate(&self) -> bool {
        self.0.law.is_degenerate()
    }

    pub fn max_bottom(&self) -> Option<i64> {
        self.0.law.max_bottom()
    }

    /// See [`JointLaw::lattice_span`].
    pub fn lattice_span(&self) -> i64 {
        self.0.law.lattice_span()
    }

    /// Geometric bottom success probability, for Galton–Watson laws.
    pub fn geometric_bottom(&self) -> Option<f64> {
        match &self.0.law {
            JointLaw::Product { bottom: Marginal::Geometric { q }, .. } => Some(*q),
            _ => None,
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        self.0.law.sample(rng)
    }

    #[inline]
    pub fn sample_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        self.0.biased.rho_star.sample(rng)
    }

    pub fn sum_of<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> (i64, i64) {
        self.0.law.sum_of(k, rng)
    }
}

impl fmt::Display for BrickLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label)
    }
}

/// A continuous-time branching process observed on a grid of `N` steps per
/// unit of `ln(N/(N−1))` time. Each step, with probability `1/N` an
/// individual is replaced by `k ~ μ` children, and with probability `λ/N`
/// a run of `k + 1` individuals (`k ~ ν`) merges into one.
///
/// The merge rate is `λ = (E[μ] − 1)/E[ν]`, the unique value making the
/// brick law critical.
#[derive(Clone, Debug)]
pub struct ContinuousTimeLaw {
    mu: Vec<(i64, BigRational)>,
    nu: Vec<(i64, BigRational)>,
    lambda: BigRational,
    n: u64,
    exact: bool,
}

impl ContinuousTimeLaw {
    pub fn new(mu: &[(i64, Probability)], nu: &[(i64, Probability)], n: u64) -> Result<Self> {
        let (mu, exact_mu) = collect_probabilities(mu)?;
        let (nu, exact_nu) = collect_probabilities(nu)?;
        let exact = exact_mu && exact_nu;
        if let Some((k, _)) = mu.iter().find(|a| a.0 < 2) {
            return Err(Error::InvalidAtom(format!("birth law must live on k >= 2, got {k}")));
        }
        if let Some((k, _)) = nu.iter().find(|a| a.0 < 1) {
            return Err(Error::InvalidAtom(format!("merge law must live on k >= 1, got {k}")));
        }
        check_total(&mu.iter().map(|a| a.1.clone()).sum(), exact)?;
        check_total(&nu.iter().map(|a| a.1.clone()).sum(), exact)?;
        let law = ContinuousTimeLaw { lambda: BigRational::zero(), mu, nu, n, exact };
        let lambda = (law.mu_moment(1) - BigRational::one()) / law.nu_moment(1);
        let law = ContinuousTimeLaw { lambda, ..law };
        let lambda_f = law.lambda();
        if BigRational::from_integer(BigInt::from(n)) <= BigRational::one() + &law.lambda {
            return Err(Error::InvalidN { n, lambda: lambda_f });
        }
        Ok(law)
    }

    fn mu_moment(&self, k: u32) -> BigRational {
        self.mu.iter().map(|(v, p)| p * BigRational::from_integer(BigInt::from(*v).pow(k))).sum()
    }

    fn nu_moment(&self, k: u32) -> BigRational {
        self.nu.iter().map(|(v, p)| p * BigRational::from_integer(BigInt::from(*v).pow(k))).sum()
    }

    pub fn lambda(&self) -> f64 {
        ratio_to_f64(&self.lambda)
    }

    /// Time elapsed per step, `ln(N/(N−1))`.
    pub fn time_step(&self) -> f64 {
        -(-1.0 / self.n as f64).ln_1p()
    }

    /// Per-step `σ²_N = (E[(μ−1)²] + λE[ν²]) / (N + λE[ν])`.
    pub fn sigma_sq_closed_form(&self) -> f64 {
        let one = BigRational::one();
        let mu_dev: BigRational = self.mu_moment(2) - self.mu_moment(1) * BigRational::from_integer(2.into()) + &one;
        let num = mu_dev + &self.lambda * self.nu_moment(2);
        let den = BigRational::from_integer(BigInt::from(self.n)) + &self.lambda * self.nu_moment(1);
        ratio_to_f64(&(num / den))
    }

    /// `lim σ²_N / ln(N/(N−1)) = E[(μ−1)²] + λE[ν²]`.
    pub fn sigma_sq_limit(&self) -> f64 {
        let mu_dev = self.mu_moment(2) - self.mu_moment(1) * BigRational::from_integer(2.into()) + BigRational::one();
        ratio_to_f64(&(mu_dev + &self.lambda * self.nu_moment(2)))
    }

    pub fn brick_law(&self) -> Result<BrickLaw> {
        let n = BigRational::from_integer(BigInt::from(self.n));
        let mut atoms: Vec<((i64, i64), Probability)> = Vec::new();
        for (k, p) in &self.mu {
            atoms.push(((1, *k), Probability::Exact(p / &n)));
        }
        for (k, p) in &self.nu {
            atoms.push(((k + 1, 1), Probability::Exact(&self.lambda * p / &n)));
        }
        let stay = BigRational::one() - (BigRational::one() + &self.lambda) / &n;
        atoms.push(((1, 1), Probability::Exact(stay)));
        let law = BrickLaw::from_atoms(&atoms)?;
        if self.exact {
            return Ok(law);
        }
        // Inputs were floats: keep the law but drop the exact moments.
        let inner = &law.0;
        Ok(BrickLaw::assemble(inner.law.clone(), inner.label.clone(), None, None))
    }
}


fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
