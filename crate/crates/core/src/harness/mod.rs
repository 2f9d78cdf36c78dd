//! Named experiments, their configuration and their reports.
//!
//! Each experiment runs a battery of checks, each check producing one
//! [`Record`]: an estimate, a CI or p-value and a verdict. Reports are
//! deterministic functions of the [`ExperimentSpec`] apart from the
//! `elapsed_ms` fields; [`Report::body`] drops those.

mod config;
mod experiments;

pub use config::{BgwSpec, Config, ContTimeSpec, LawSpec, ProbValue, SimulateSpec, StripSpec};

use crate::error::{Error, Result};
use crate::rng::SeedTree;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Martingale,
    VarianceClt,
    Covariance,
    Kolmogorov,
    Yaglom,
    FellerMarginal,
    ExtinctionLaw,
    Duality,
    DualExponentials,
    Meshing,
    Thm12Hypotheses,
    BgwCrosscheck,
    LongThin,
    FellerConsistency,
    OracleEquivalence,
    SqrtDrift,
    DoobBound,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 17] = [
        ExperimentId::Martingale,
        ExperimentId::VarianceClt,
        ExperimentId::Covariance,
        ExperimentId::Kolmogorov,
        ExperimentId::Yaglom,
        ExperimentId::FellerMarginal,
        ExperimentId::ExtinctionLaw,
        ExperimentId::Duality,
        ExperimentId::DualExponentials,
        ExperimentId::Meshing,
        ExperimentId::Thm12Hypotheses,
        ExperimentId::BgwCrosscheck,
        ExperimentId::LongThin,
        ExperimentId::FellerConsistency,
        ExperimentId::OracleEquivalence,
        ExperimentId::SqrtDrift,
        ExperimentId::DoobBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Martingale => "martingale",
            ExperimentId::VarianceClt => "variance_clt",
            ExperimentId::Covariance => "covariance",
            ExperimentId::Kolmogorov => "kolmogorov",
            ExperimentId::Yaglom => "yaglom",
            ExperimentId::FellerMarginal => "feller_marginal",
            ExperimentId::ExtinctionLaw => "extinction_law",
            ExperimentId::Duality => "duality",
            ExperimentId::DualExponentials => "dual_exponentials",
            ExperimentId::Meshing => "meshing",
            ExperimentId::Thm12Hypotheses => "thm12_hypotheses",
            ExperimentId::BgwCrosscheck => "bgw_crosscheck",
            ExperimentId::LongThin => "long_thin",
            ExperimentId::FellerConsistency => "feller_consistency",
            ExperimentId::OracleEquivalence => "oracle_equivalence",
            ExperimentId::SqrtDrift => "sqrt_drift",
            ExperimentId::DoobBound => "doob_bound",
        }
    }

    /// Statement checked by the experiment.
    pub fn claim(&self) -> &'static str {
        match self {
            ExperimentId::Martingale => "E[M_1([0,n[)] = n: slice populations are martingales",
            ExperimentId::VarianceClt => "Var(M_1)/n -> sigma^2 and (M_1 - n)/sqrt(n) => N(0, sigma^2)",
            ExperimentId::Covariance => "Cov(M_1([0,n[), M_1([n,2n[)) = o(n)",
            ExperimentId::Kolmogorov => "n P(tau_0 >= n) -> 2/sigma^2 for a single ancestor",
            ExperimentId::Yaglom => "M_n/n given survival => Exp(2/sigma^2)",
            ExperimentId::FellerMarginal => "M_n([0,n[)/n => X_1 for the Feller diffusion dX = sigma sqrt(X) dW, X_0 = 1",
            ExperimentId::ExtinctionLaw => "tau_0/n => theta_0 with P(theta_0 <= t) = exp(-2/(sigma^2 t))",
            ExperimentId::Duality => "K-weighted re-rooted dual forest of rho = tK-weighted primal forest of the transpose",
            ExperimentId::DualExponentials => "K_n/n and I_n/n => Exp(2/sigma^2)",
            ExperimentId::Meshing => "distance from the forest ball to its eps-meshing decreases with eps",
            ExperimentId::Thm12Hypotheses => "E[(dA)^2] ~ sigma^2 n, bounded below, dA/sqrt(n) => N(0, sigma^2)",
            ExperimentId::BgwCrosscheck => "geometric bottoms give i.i.d. Galton-Watson trees",
            ExperimentId::LongThin => "P(population stays in (0, n] at times n, 2n, ..., Kn) decays exponentially in K",
            ExperimentId::FellerConsistency => "exact Feller transitions agree with the Euler scheme and are additive in mass",
            ExperimentId::OracleEquivalence => "stepped slice populations equal those read off the brick strip",
            ExperimentId::SqrtDrift => "E[sqrt(M_1) - sqrt(n)] <= -c/sqrt(n)",
            ExperimentId::DoobBound => "P(reach x from k) <= k/x",
        }
    }

    /// Short label of the result being reproduced.
    pub fn citation(&self) -> &'static str {
        match self {
            ExperimentId::Martingale => "martingale-identity",
            ExperimentId::VarianceClt => "one-step-variance-and-clt",
            ExperimentId::Covariance => "adjacent-slice-covariance",
            ExperimentId::Kolmogorov => "kolmogorov-estimate",
            ExperimentId::Yaglom => "yaglom-limit",
            ExperimentId::FellerMarginal => "feller-scaling-limit",
            ExperimentId::ExtinctionLaw => "feller-extinction-law",
            ExperimentId::Duality => "forest-duality",
            ExperimentId::DualExponentials => "dual-exponential-limits",
            ExperimentId::Meshing => "meshing-approximation",
            ExperimentId::Thm12Hypotheses => "feller-convergence-hypotheses",
            ExperimentId::BgwCrosscheck => "galton-watson-special-case",
            ExperimentId::LongThin => "long-thin-populations",
            ExperimentId::FellerConsistency => "feller-reference-sampler",
            ExperimentId::OracleEquivalence => "flow-strip-equivalence",
            ExperimentId::SqrtDrift => "square-root-supermartingale",
            ExperimentId::DoobBound => "doob-maximal-bound",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentId,
    pub laws: Vec<LawSpec>,
    pub n_grid: Vec<i64>,
    pub replicas: u64,
    pub master_seed: u64,
    pub significance: f64,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

fn symmetric() -> LawSpec {
    LawSpec::atoms(&[(1, 2, "1/2"), (2, 1, "1/2")])
}

fn skewed() -> LawSpec {
    LawSpec::atoms(&[(1, 3, "1/3"), (2, 1, "2/3")])
}

fn binary() -> LawSpec {
    LawSpec::bgw(&[(0, "1/2"), (2, "1/2")])
}

impl ExperimentSpec {
    /// The sizes used by the acceptance battery.
    pub fn default_for(id: ExperimentId) -> Self {
        use ExperimentId::*;
        let three = vec![symmetric(), skewed(), binary()];
        let (laws, n_grid, replicas): (Vec<LawSpec>, Vec<i64>, u64) = match id {
            Martingale => (three, vec![10, 100, 10_000], 1_000_000),
            VarianceClt => (three, vec![10_000], 100_000),
            Covariance => (three, vec![10_000], 100_000),
            Kolmogorov => (three, vec![200, 400], 1_000_000),
            Yaglom => (vec![symmetric()], vec![300], 600_000),
            FellerMarginal => (vec![symmetric()], vec![2000], 100_000),
            ExtinctionLaw => (vec![symmetric()], vec![2000], 2_000),
            Duality => (vec![symmetric(), skewed()], vec![1, 2, 3], 100_000),
            DualExponentials => (vec![symmetric()], vec![50], 6_000),
            Meshing => (vec![symmetric()], vec![2000], 200),
            Thm12Hypotheses => (vec![symmetric()], vec![1, 10, 100, 1000, 10_000], 100_000),
            BgwCrosscheck => (vec![binary(), LawSpec::bgw(&[(0, "1/3"), (1, "1/3"), (2, "1/3")])], vec![12], 100_000),
            LongThin => (vec![symmetric(), skewed()], vec![100], 100_000),
            FellerConsistency => (vec![], vec![], 100_000),
            OracleEquivalence => (three, vec![12], 1_000),
            SqrtDrift => (three, vec![100, 1000, 10_000], 100_000),
            DoobBound => (vec![symmetric()], vec![], 100_000),
        };
        ExperimentSpec { experiment: id, laws, n_grid, replicas, master_seed: DEFAULT_SEED, significance: 0.01, output: None }
    }

    /// Defaults for `id`, overridden by whatever the configuration sets.
    pub fn from_config(id: ExperimentId, config: &Config) -> Result<Self> {
        let mut spec = Self::default_for(id);
        if let Some(laws) = config.law_specs() {
            spec.laws = laws;
        }
        if let Some(n) = &config.n_grid {
            spec.n_grid = n.clone();
        }
        if let Some(r) = config.replicas {
            spec.replicas = r;
        }
        if let Some(s) = config.master_seed {
            spec.master_seed = s;
        }
        if let Some(s) = config.significance {
            spec.significance = s;
        }
        spec.output = config.output.clone();
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < 1 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if !(self.significance > 0.0 && self.significance <= 0.1) {
            return Err(Error::Config(format!("significance must be in (0, 0.1], got {}", self.significance)));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) || self.n_grid.iter().any(|&n| n < 1) {
            return Err(Error::Config("n_grid must be positive and increasing".into()));
        }
        for law in &self.laws {
            law.build()?;
        }
        Ok(())
    }

    pub(crate) fn seeds(&self) -> SeedTree {
        SeedTree::new(self.master_seed).named(self.experiment.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: ExperimentId,
    pub claim: String,
    pub citation: String,
    pub law: String,
    pub parameters: String,
    #[serde(deserialize_with = "nan_null::float")]
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "nan_null::pair")]
    pub ci: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub verdict: Verdict,
    /// Key of the seed-tree node the check drew from.
    pub seed: u64,
    pub elapsed_ms: u64,
}

/// JSON has no NaN: serde_json writes it as `null`, read back here as NaN.
mod nan_null {
    use serde::{Deserialize, Deserializer};

    pub fn float<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn pair<'de, D: Deserializer<'de>>(d: D) -> Result<Option<(f64, f64)>, D::Error> {
        let p = Option::<(Option<f64>, Option<f64>)>::deserialize(d)?;
        Ok(p.map(|(a, b)| (a.unwrap_or(f64::NAN), b.unwrap_or(f64::NAN))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentId,
    pub master_seed: u64,
    pub records: Vec<Record>,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    /// The report without timings: identical across reruns of the same spec.
    pub fn body(&self) -> Report {
        let mut r = self.clone();
        r.elapsed_ms = 0;
        r.records.iter_mut().for_each(|rec| rec.elapsed_ms = 0);
        r
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

const CSV_HEADER: &str = "experiment,citation,law,parameters,estimate,target,ci_low,ci_high,p_value,verdict,seed,elapsed_ms";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Write reports as a JSON array or as CSV rows (one per record).
pub fn write_reports<W: Write>(reports: &[Report], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, reports).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for rec in reports.iter().flat_map(|r| &r.records) {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    rec.experiment,
                    csv_field(&rec.citation),
                    csv_field(&rec.law),
                    csv_field(&rec.parameters),
                    rec.estimate,
                    opt(rec.target),
                    opt(rec.ci.map(|c| c.0)),
                    opt(rec.ci.map(|c| c.1)),
                    opt(rec.p_value),
                    if rec.verdict == Verdict::Pass { "pass" } else { "fail" },
                    rec.seed,
                    rec.elapsed_ms
                )?;
            }
        }
    }
    Ok(())
}

/// Parse a JSON report file and drop its timings.
pub fn report_bodies(json: &str) -> Result<Vec<Report>> {
    let reports: Vec<Report> = serde_json::from_str(json).map_err(|e| Error::Io(e.to_string()))?;
    Ok(reports.iter().map(Report::body).collect())
}

/// What a check computed, before bookkeeping.
#[derive(Clone, Debug, Default)]
pub(crate) struct Check {
    pub law: String,
    pub parameters: String,
    pub estimate: f64,
    pub target: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub p_value: Option<f64>,
    pub pass: bool,
}

/// Collects records for one experiment run.
pub(crate) struct Recorder<'a> {
    spec: &'a ExperimentSpec,
    records: Vec<Record>,
    clock: Instant,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a ExperimentSpec) -> Self {
        Recorder { spec, records: Vec::new(), clock: Instant::now() }
    }

    pub fn push(&mut self, seed: SeedTree, check: Check) {
        let id = self.spec.experiment;
        let elapsed = self.clock.elapsed().as_millis() as u64;
        self.clock = Instant::now();
        self.records.push(Record {
            experiment: id,
            claim: id.claim().into(),
            citation: id.citation().into(),
            law: check.law,
            parameters: check.parameters,
            estimate: check.estimate,
            target: check.target,
            ci: check.ci,
            p_value: check.p_value,
            verdict: Verdict::from_bool(check.pass),
            seed: seed.key(),
            elapsed_ms: elapsed,
        });
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let start = Instant::now();
    let mut rec = Recorder::new(spec);
    experiments::run(spec, &mut rec)?;
    Ok(Report {
        experiment: spec.experiment,
        master_seed: spec.master_seed,
        records: rec.records,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Every experiment with its defaults; `replicas` and `seed` override
/// the defaults when given.
pub fn verify_all(seed: Option<u64>, replicas: Option<u64>) -> Result<Vec<Report>> {
    ExperimentId::ALL
        .iter()
        .map(|&id| {
            let mut spec = ExperimentSpec::default_for(id);
            if let Some(s) = seed {
                spec.master_seed = s;
            }
            if let Some(r) = replicas {
                spec.replicas = r;
            }
            run_experiment(&spec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_round_trip_through_json_with_nan() {
        let spec = ExperimentSpec::default_for(ExperimentId::Yaglom);
        let mut rec = Recorder::new(&spec);
        rec.push(spec.seeds(), Check { law: "l".into(), estimate: f64::NAN, ci: Some((f64::NAN, 1.0)), ..Check::default() });
        rec.push(spec.seeds(), Check { estimate: 0.5, target: Some(0.5), p_value: Some(0.2), pass: true, ..Check::default() });
        let report = Report { experiment: spec.experiment, master_seed: 1, records: rec.records, elapsed_ms: 3 };
        let mut json = Vec::new();
        write_reports(std::slice::from_ref(&report), Format::Json, &mut json).unwrap();
        let back = report_bodies(std::str::from_utf8(&json).unwrap()).unwrap();
        assert!(back[0].records[0].estimate.is_nan());
        let ci = back[0].records[0].ci.unwrap();
        assert!(ci.0.is_nan() && ci.1 == 1.0);
        assert_eq!(back[0].records[1], Record { elapsed_ms: 0, ..report.records[1].clone() });
        assert!(!back[0].passed());
        assert_eq!(back[0].elapsed_ms, 0);
    }
}
