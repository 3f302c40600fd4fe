//! Nonnegative exact rationals extended with an absorbing top element, the
//! carrier of the `ExtendedRational` distance monoid.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// A nonnegative exact rational or the top element `top` absorbing under `+`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ExtRational {
    Finite(BigRational),
    Top,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalError {
    #[error("cannot parse rational literal {0:?}")]
    Parse(String),
    #[error("rational distance values must be nonnegative, got {0}")]
    Negative(String),
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(BigRational::zero())
    }

    pub fn one() -> Self {
        ExtRational::Finite(BigRational::one())
    }

    pub fn from_ints(num: i64, den: i64) -> Self {
        ExtRational::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtRational::Finite(q) if q.is_zero())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, ExtRational::Top)
    }

    pub fn add(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Top,
        }
    }

    pub fn halve(&self) -> ExtRational {
        match self {
            ExtRational::Finite(q) => {
                ExtRational::Finite(q / BigRational::from_integer(BigInt::from(2)))
            }
            // No canonical half below top; the halving hook is only invoked on
            // finite values by the initial-sequence builder.
            ExtRational::Top => ExtRational::one(),
        }
    }

    pub fn parse(text: &str) -> Result<ExtRational, RationalError> {
        let t = text.trim();
        if t == "top" || t == "T" {
            return Ok(ExtRational::Top);
        }
        let q = match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| RationalError::Parse(text.into()))?;
                let d: BigInt = d.trim().parse().map_err(|_| RationalError::Parse(text.into()))?;
                if d.is_zero() {
                    return Err(RationalError::Parse(text.into()));
                }
                BigRational::new(n, d)
            }
            None => {
                let n: BigInt = t.parse().map_err(|_| RationalError::Parse(text.into()))?;
                BigRational::from_integer(n)
            }
        };
        if q.is_negative() {
            return Err(RationalError::Negative(q.to_string()));
        }
        Ok(ExtRational::Finite(q))
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Top, ExtRational::Top) => Ordering::Equal,
            (ExtRational::Top, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Finite(_), ExtRational::Top) => Ordering::Less,
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Top => write!(f, "top"),
            ExtRational::Finite(q) => write!(f, "{q}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_order() {
        let half = ExtRational::parse("1/2").unwrap();
        let third = ExtRational::parse("1/3").unwrap();
        assert!(third < half);
        assert!(half < ExtRational::Top);
        assert_eq!(ExtRational::parse("top").unwrap(), ExtRational::Top);
        assert!(ExtRational::parse("-1/2").is_err());
        assert!(ExtRational::parse("1/0").is_err());
    }

    #[test]
    fn top_absorbs() {
        let half = ExtRational::parse("1/2").unwrap();
        assert_eq!(half.add(&ExtRational::Top), ExtRational::Top);
        assert_eq!(ExtRational::Top.add(&ExtRational::Top), ExtRational::Top);
    }

    #[test]
    fn addition_is_exact() {
        let a = ExtRational::parse("1/2").unwrap();
        let b = ExtRational::parse("1/3").unwrap();
        assert_eq!(a.add(&b), ExtRational::parse("5/6").unwrap());
    }
}
