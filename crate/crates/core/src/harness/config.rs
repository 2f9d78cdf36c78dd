//! TOML configuration.
//!
//! ```toml
//! experiment = "martingale"
//! master_seed = 7
//! replicas = 100000
//! significance = 0.01
//! n_grid = [10, 100]
//! output = "martingale.json"
//!
//! [law]
//! atoms = [[1, 2, "1/2"], [2, 1, "1/2"]]
//! # or: bgw = { offspring = [[0, "1/2"], [2, "1/2"]] }
//! # or: cont_time = { mu = [[2, "1"]], nu = [[1, "1"]], N = 10 }
//! ```
//!
//! Several laws can be given as `[[laws]]` tables instead of `[law]`.
//! Probabilities are strings (`"1/3"`, `"0.25"`, exact) or plain numbers.

use super::ExperimentId;
use crate::error::{Error, Result};
use crate::laws::{BrickLaw, Probability};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbValue {
    Text(String),
    Number(f64),
}

impl ProbValue {
    pub fn probability(&self) -> Result<Probability> {
        match self {
            ProbValue::Text(s) => s.parse(),
            ProbValue::Number(x) => Ok(Probability::Float(*x)),
        }
    }
}

impl From<&str> for ProbValue {
    fn from(s: &str) -> Self {
        ProbValue::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BgwSpec {
    pub offspring: Vec<(u32, ProbValue)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContTimeSpec {
    pub mu: Vec<(i64, ProbValue)>,
    pub nu: Vec<(i64, ProbValue)>,
    #[serde(rename = "N")]
    pub n: u64,
}

/// One law block: exactly one of the three forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<(i64, i64, ProbValue)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bgw: Option<BgwSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cont_time: Option<ContTimeSpec>,
}

impl LawSpec {
    pub fn atoms(atoms: &[(i64, i64, &str)]) -> Self {
        LawSpec { atoms: Some(atoms.iter().map(|&(b, h, p)| (b, h, p.into())).collect()), ..LawSpec::default() }
    }

    pub fn bgw(offspring: &[(u32, &str)]) -> Self {
        LawSpec {
            bgw: Some(BgwSpec { offspring: offspring.iter().map(|&(k, p)| (k, p.into())).collect() }),
            ..LawSpec::default()
        }
    }

    pub fn build(&self) -> Result<BrickLaw> {
        match (&self.atoms, &self.bgw, &self.cont_time) {
            (Some(atoms), None, None) => {
                let atoms = atoms.iter().map(|(b, h, p)| Ok(((*b, *h), p.probability()?))).collect::<Result<Vec<_>>>()?;
                BrickLaw::from_atoms(&atoms)
            }
            (None, Some(bgw), None) => BrickLaw::from_bgw(&Self::offspring(bgw)?),
            (None, None, Some(ct)) => {
                let conv = |v: &[(i64, ProbValue)]| v.iter().map(|(k, p)| Ok((*k, p.probability()?))).collect::<Result<Vec<_>>>();
                BrickLaw::from_continuous_time(&conv(&ct.mu)?, &conv(&ct.nu)?, ct.n)
            }
            _ => Err(Error::Config("a law block needs exactly one of `atoms`, `bgw`, `cont_time`".into())),
        }
    }

    /// Offspring law of a `bgw` block, as floats.
    pub fn offspring_floats(&self) -> Result<Vec<(u32, f64)>> {
        let bgw = self.bgw.as_ref().ok_or_else(|| Error::Config("expected a `bgw` law block".into()))?;
        Ok(Self::offspring(bgw)?.into_iter().map(|(k, p)| (k, p.value())).collect())
    }

    fn offspring(bgw: &BgwSpec) -> Result<Vec<(u32, Probability)>> {
        bgw.offspring.iter().map(|(k, p)| Ok((*k, p.probability()?))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub endpoints: Vec<i64>,
    pub horizon: u64,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        SimulateSpec { endpoints: vec![0, 100], horizon: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripSpec {
    pub height: usize,
    pub window: (i64, i64),
}

impl Default for StripSpec {
    fn default() -> Self {
        StripSpec { height: 8, window: (-10, 10) }
    }
}

/// Contents of a configuration file. Every field is optional; missing ones
/// fall back to the experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<ExperimentId>,
    pub master_seed: Option<u64>,
    pub replicas: Option<u64>,
    pub significance: Option<f64>,
    pub n_grid: Option<Vec<i64>>,
    pub output: Option<PathBuf>,
    pub law: Option<LawSpec>,
    pub laws: Option<Vec<LawSpec>>,
    pub simulate: Option<SimulateSpec>,
    pub strip: Option<StripSpec>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.law.is_some() && config.laws.is_some() {
            return Err(Error::Config("give either `law` or `laws`, not both".into()));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Laws given in the file, if any.
    pub fn law_specs(&self) -> Option<Vec<LawSpec>> {
        match (&self.law, &self.laws) {
            (Some(l), _) => Some(vec![l.clone()]),
            (None, Some(ls)) => Some(ls.clone()),
            (None, None) => None,
        }
    }
}
