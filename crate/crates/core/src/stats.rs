//! Small statistical toolkit: streaming moments, goodness-of-fit tests and
//! confidence intervals. Distribution functions come from `statrs`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Mergeable running mean and variance (Welford / Chan).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Summary) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// As if every observation had been multiplied by `c`.
    pub fn scale(&mut self, c: f64) {
        self.mean *= c;
        self.m2 *= c * c;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Two-sided normal confidence interval for the mean.
    pub fn mean_ci(&self, level: f64) -> (f64, f64) {
        let half = normal_quantile(0.5 + level / 2.0) * self.std_err();
        (self.mean - half, self.mean + half)
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

/// Running mean/covariance of a pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub x: Summary,
    pub y: Summary,
    cxy: f64,
}

impl PairSummary {
    pub fn push(&mut self, x: f64, y: f64) {
        let dx = x - self.x.mean;
        self.x.push(x);
        self.y.push(y);
        self.cxy += dx * (y - self.y.mean);
    }

    pub fn merge(&mut self, other: &PairSummary) {
        if other.x.count == 0 {
            return;
        }
        if self.x.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.x.count as f64, other.x.count as f64);
        let dx = other.x.mean - self.x.mean;
        let dy = other.y.mean - self.y.mean;
        self.cxy += other.cxy + dx * dy * na * nb / (na + nb);
        self.x.merge(&other.x);
        self.y.merge(&other.y);
    }

    pub fn covariance(&self) -> f64 {
        self.cxy / (self.x.count as f64 - 1.0)
    }

    pub fn correlation(&self) -> f64 {
        self.covariance() / (self.x.variance() * self.y.variance()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let mut sum = 0.0;
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            sum += (-j * j * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

const KS_MIN: usize = 30;

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    if sample.len() < KS_MIN {
        return Err(Error::TooFewSamples { got: sample.len(), min: KS_MIN });
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(TestResult { statistic: d, p_value: ks_p_value(d, n) })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let min = a.len().min(b.len());
    if min < KS_MIN {
        return Err(Error::TooFewSamples { got: min, min: KS_MIN });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(TestResult { statistic: d, p_value: ks_p_value(d, n * m / (n + m)) })
}

/// Pearson chi-square goodness of fit. Expected probabilities must sum to 1.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<TestResult> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::InvalidArgument("chi-square needs matching bins (at least 2)".into()));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * total as f64;
        if e <= 0.0 {
            return Err(Error::InvalidArgument("chi-square bin with zero expectation".into()));
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    chi_square_result(stat, observed.len() - 1)
}

/// Chi-square test of homogeneity for two count vectors over the same bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<TestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument("chi-square needs matching bins (at least 2)".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut bins = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        bins += 1;
        let ea = col * na / (na + nb);
        let eb = col * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("chi-square needs two non-empty bins".into()));
    }
    chi_square_result(stat, bins - 1)
}

fn chi_square_result(stat: f64, df: usize) -> Result<TestResult> {
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(TestResult { statistic: stat, p_value: dist.sf(stat) })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Two-sided z-test for equality of two proportions.
pub fn two_proportion_test(s1: u64, n1: u64, s2: u64, n2: u64) -> TestResult {
    let (p1, p2) = (s1 as f64 / n1 as f64, s2 as f64 / n2 as f64);
    let pooled = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return TestResult { statistic: 0.0, p_value: if p1 == p2 { 1.0 } else { 0.0 } };
    }
    let z = (p1 - p2) / se;
    TestResult { statistic: z, p_value: 2.0 * (1.0 - normal_cdf(z.abs())) }
}

/// Ordinary least squares fit `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Whether two closed intervals intersect.
pub fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn kolmogorov_branches_agree() {
        for &l in &[1.15, 1.18, 1.21] {
            let mut a = 0.0;
            for k in 1..100 {
                let kf = k as f64;
                a += 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * l * l).exp();
            }
            assert_relative_eq!(kolmogorov_sf(l), a, epsilon = 1e-10);
        }
        // Classical critical value: P(K > 1.3581) = 0.05.
        assert_relative_eq!(kolmogorov_sf(1.3581), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut rng = crate::SimRng::seed_from_u64(1);
        let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.001);
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.95).collect();
        assert!(ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
        let ys: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&xs, &ys).unwrap().p_value > 0.001);
        assert!(matches!(ks_one_sample(&xs[..3], |x| x), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn chi_square_matches_hand_computation() {
        let r = chi_square_gof(&[30, 70], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(r.statistic, 16.0);
        assert_relative_eq!(r.p_value, 6.334e-5, max_relative = 1e-3);
        let h = chi_square_two_sample(&[10, 20], &[10, 20]).unwrap();
        assert_relative_eq!(h.statistic, 0.0);
    }

    #[test]
    fn wilson_contains_truth() {
        let (lo, hi) = wilson_interval(50, 100, 0.95);
        assert!(lo < 0.5 && hi > 0.5);
        assert_relative_eq!(lo, 0.4038, epsilon = 1e-3);
    }

    proptest! {
        #[test]
        fn summary_merge_is_exact(xs in prop::collection::vec(-1e3f64..1e3, 2..60), cut in 0usize..60) {
            let cut = cut.min(xs.len());
            let whole: Summary = xs.iter().copied().collect();
            let mut left: Summary = xs[..cut].iter().copied().collect();
            left.merge(&xs[cut..].iter().copied().collect());
            prop_assert!((whole.mean - left.mean).abs() < 1e-9);
            prop_assert!((whole.variance() - left.variance()).abs() < 1e-6 * (1.0 + whole.variance()));
        }

        #[test]
        fn pair_merge_matches(xs in prop::collection::vec((-10f64..10.0, -10f64..10.0), 3..40), cut in 0usize..40) {
            let cut = cut.min(xs.len());
            let mut whole = PairSummary::default();
            let (mut a, mut b) = (PairSummary::default(), PairSummary::default());
            for (i, &(x, y)) in xs.iter().enumerate() {
                whole.push(x, y);
                if i < cut { a.push(x, y) } else { b.push(x, y) }
            }
            a.merge(&b);
            prop_assert!((whole.covariance() - a.covariance()).abs() < 1e-8);
        }
    }
}
