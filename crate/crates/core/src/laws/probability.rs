use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// A probability given either exactly (`"1/3"`, `"0.25"`) or as a float.
/// Exact inputs are validated with exact arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum Probability {
    Exact(BigRational),
    Float(f64),
}

impl Probability {
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Probability::Exact(BigRational::new(numer.into(), denom.into()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Probability::Exact(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Probability::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Probability::Float(x) => *x,
        }
    }

    pub(crate) fn to_rational(&self) -> Result<BigRational> {
        match self {
            Probability::Exact(r) => Ok(r.clone()),
            Probability::Float(x) => {
                BigRational::from_float(*x).ok_or_else(|| Error::InvalidAtom(format!("non-finite probability {x}")))
            }
        }
    }
}

impl From<f64> for Probability {
    fn from(x: f64) -> Self {
        Probability::Float(x)
    }
}

impl From<BigRational> for Probability {
    fn from(r: BigRational) -> Self {
        Probability::Exact(r)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(r) => write!(f, "{r}"),
            Probability::Float(x) => write!(f, "{x}"),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer = if digits.is_empty() { BigInt::zero() } else { digits.parse::<BigInt>().ok()? };
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let a = parse_decimal(a.trim());
            let b = parse_decimal(b.trim());
            return match (a, b) {
                (Some(a), Some(b)) if !b.is_zero() => Ok(Probability::Exact(a / b)),
                _ => Err(Error::Config(format!("cannot parse probability {s:?}"))),
            };
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Probability::Exact(r));
        }
        s.parse::<f64>().map(Probability::Float).map_err(|_| Error::Config(format!("cannot parse probability {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!("1/3".parse::<Probability>().unwrap(), Probability::ratio(1, 3));
        assert_eq!("0.25".parse::<Probability>().unwrap(), Probability::ratio(1, 4));
        assert_eq!(" 2 ".parse::<Probability>().unwrap(), Probability::ratio(2, 1));
        assert_eq!("1e-3".parse::<Probability>().unwrap(), Probability::Float(1e-3));
        assert!("1/0".parse::<Probability>().is_err());
        assert!("abc".parse::<Probability>().is_err());
    }
}
