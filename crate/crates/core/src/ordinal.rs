//! Ordinal notations in Cantor normal form over omega, plus a symbolic
//! uncountable parameter `Omega` that compares above every CNF term and is
//! never enumerated below.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// A Cantor-normal-form term: a finite sum of `w^exp * coeff` monomials with
/// natural exponents, stored with strictly descending exponents and positive
/// coefficients. The empty sum is 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Cnf {
    /// (exponent, coefficient) pairs, exponents strictly descending, coeffs > 0.
    terms: Vec<(u64, u64)>,
}

/// An ordinal notation: either a CNF term below `w^w`-ish territory, or the
/// symbolic uncountable `Omega` (rendered `omega-1`). `Omega` supports
/// comparison but not successor, arithmetic, or enumeration below it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum OrdinalNotation {
    Cnf(Cnf),
    Omega,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrdinalError {
    #[error("cannot parse ordinal notation {0:?}")]
    Parse(String),
    #[error("operation not defined on the symbolic uncountable notation")]
    SymbolicUncountable,
}

impl Cnf {
    pub fn zero() -> Self {
        Cnf { terms: Vec::new() }
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Cnf::zero()
        } else {
            Cnf { terms: vec![(0, n)] }
        }
    }

    pub fn omega() -> Self {
        Cnf { terms: vec![(1, 1)] }
    }

    /// `w^exp * coeff`, normalized.
    pub fn monomial(exp: u64, coeff: u64) -> Self {
        if coeff == 0 {
            Cnf::zero()
        } else {
            Cnf { terms: vec![(exp, coeff)] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero or a limit ordinal: no `w^0` monomial.
    pub fn is_limit_or_zero(&self) -> bool {
        self.terms.last().map_or(true, |&(e, _)| e > 0)
    }

    pub fn is_limit(&self) -> bool {
        !self.is_zero() && self.is_limit_or_zero()
    }

    pub fn finite_part(&self) -> u64 {
        match self.terms.last() {
            Some(&(0, c)) => c,
            _ => 0,
        }
    }

    /// If the notation denotes a natural number, that number.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(0, c)] => Some(*c),
            _ => None,
        }
    }

    pub fn succ(&self) -> Self {
        let mut terms = self.terms.clone();
        match terms.last_mut() {
            Some(t) if t.0 == 0 => t.1 += 1,
            _ => terms.push((0, 1)),
        }
        Cnf { terms }
    }

    /// Natural (Hessenberg) sum: adds coefficients exponent-wise. For the
    /// notations used here (heights at most `w^k`) this agrees with the
    /// ordinal sum whenever the left summand's least exponent is at least the
    /// right summand's greatest, which is the only way it is used.
    pub fn natural_sum(&self, other: &Cnf) -> Cnf {
        let mut terms: Vec<(u64, u64)> = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let a = self.terms.get(i);
            let b = other.terms.get(j);
            match (a, b) {
                (Some(&(ea, ca)), Some(&(eb, cb))) => {
                    if ea == eb {
                        terms.push((ea, ca + cb));
                        i += 1;
                        j += 1;
                    } else if ea > eb {
                        terms.push((ea, ca));
                        i += 1;
                    } else {
                        terms.push((eb, cb));
                        j += 1;
                    }
                }
                (Some(&t), None) => {
                    terms.push(t);
                    i += 1;
                }
                (None, Some(&t)) => {
                    terms.push(t);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Cnf { terms }
    }

    fn cmp_terms(&self, other: &Cnf) -> Ordering {
        for k in 0.. {
            match (self.terms.get(k), other.terms.get(k)) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(a), Some(b)) => {
                    let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
        unreachable!()
    }
}

impl OrdinalNotation {
    pub fn zero() -> Self {
        OrdinalNotation::Cnf(Cnf::zero())
    }

    pub fn from_nat(n: u64) -> Self {
        OrdinalNotation::Cnf(Cnf::from_nat(n))
    }

    pub fn omega() -> Self {
        OrdinalNotation::Cnf(Cnf::omega())
    }

    pub fn omega_squared() -> Self {
        OrdinalNotation::Cnf(Cnf::monomial(2, 1))
    }

    /// `w * n`.
    pub fn omega_times(n: u64) -> Self {
        OrdinalNotation::Cnf(Cnf::monomial(1, n))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, OrdinalNotation::Cnf(c) if c.is_zero())
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, OrdinalNotation::Omega)
    }

    /// Limit notations: nonzero CNF terms without a finite part, and `Omega`.
    pub fn is_limit(&self) -> bool {
        match self {
            OrdinalNotation::Cnf(c) => c.is_limit(),
            OrdinalNotation::Omega => true,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            OrdinalNotation::Cnf(c) => c.as_nat(),
            OrdinalNotation::Omega => None,
        }
    }

    pub fn succ(&self) -> Result<OrdinalNotation, OrdinalError> {
        match self {
            OrdinalNotation::Cnf(c) => Ok(OrdinalNotation::Cnf(c.succ())),
            OrdinalNotation::Omega => Err(OrdinalError::SymbolicUncountable),
        }
    }

    pub fn natural_sum(&self, other: &OrdinalNotation) -> Result<OrdinalNotation, OrdinalError> {
        match (self, other) {
            (OrdinalNotation::Cnf(a), OrdinalNotation::Cnf(b)) => {
                Ok(OrdinalNotation::Cnf(a.natural_sum(b)))
            }
            _ => Err(OrdinalError::SymbolicUncountable),
        }
    }

    pub fn min<'a>(&'a self, other: &'a OrdinalNotation) -> &'a OrdinalNotation {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Parses `0`, `5`, `w`, `w*3`, `w^2`, `w^2*4`, sums joined by `+`, and
    /// the symbolic `omega-1`.
    pub fn parse(text: &str) -> Result<OrdinalNotation, OrdinalError> {
        let t = text.trim();
        if t == "omega-1" || t == "Omega" {
            return Ok(OrdinalNotation::Omega);
        }
        let mut sum = Cnf::zero();
        for part in t.split('+') {
            let part = part.trim();
            if part.is_empty() {
                return Err(OrdinalError::Parse(text.to_string()));
            }
            let mono = parse_monomial(part).ok_or_else(|| OrdinalError::Parse(text.to_string()))?;
            // Reject out-of-order sums rather than silently reordering.
            if let (Some(&(last_e, _)), Some(&(e, _))) = (sum.terms.last(), mono.terms.first()) {
                if e >= last_e {
                    return Err(OrdinalError::Parse(text.to_string()));
                }
            }
            sum = sum.natural_sum(&mono);
        }
        Ok(OrdinalNotation::Cnf(sum))
    }
}

fn parse_monomial(part: &str) -> Option<Cnf> {
    if let Ok(n) = part.parse::<u64>() {
        return Some(Cnf::from_nat(n));
    }
    let rest = part.strip_prefix('w')?;
    if rest.is_empty() {
        return Some(Cnf::omega());
    }
    let (exp, rest) = if let Some(r) = rest.strip_prefix('^') {
        let end = r.find('*').unwrap_or(r.len());
        (r[..end].parse::<u64>().ok()?, &r[end..])
    } else {
        (1, rest)
    };
    let coeff = if rest.is_empty() {
        1
    } else {
        rest.strip_prefix('*')?.parse::<u64>().ok()?
    };
    if coeff == 0 {
        return None;
    }
    Some(Cnf::monomial(exp, coeff))
}

impl PartialOrd for OrdinalNotation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdinalNotation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (OrdinalNotation::Omega, OrdinalNotation::Omega) => Ordering::Equal,
            (OrdinalNotation::Omega, OrdinalNotation::Cnf(_)) => Ordering::Greater,
            (OrdinalNotation::Cnf(_), OrdinalNotation::Omega) => Ordering::Less,
            (OrdinalNotation::Cnf(a), OrdinalNotation::Cnf(b)) => a.cmp_terms(b),
        }
    }
}

impl fmt::Display for OrdinalNotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinalNotation::Omega => write!(f, "omega-1"),
            OrdinalNotation::Cnf(c) => {
                if c.terms.is_empty() {
                    return write!(f, "0");
                }
                for (k, &(e, co)) in c.terms.iter().enumerate() {
                    if k > 0 {
                        write!(f, "+")?;
                    }
                    match (e, co) {
                        (0, n) => write!(f, "{n}")?,
                        (1, 1) => write!(f, "w")?,
                        (1, n) => write!(f, "w*{n}")?,
                        (e, 1) => write!(f, "w^{e}")?,
                        (e, n) => write!(f, "w^{e}*{n}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> OrdinalNotation {
        OrdinalNotation::parse(s).unwrap()
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["0", "5", "w", "w*3", "w^2", "w^2+w*3+5", "w^3*2+w+1", "omega-1"] {
            assert_eq!(ord(s).to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "x", "w^", "5+w", "w*0", "w+w"] {
            assert!(OrdinalNotation::parse(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn order_is_lexicographic_on_cnf() {
        let mut v = vec![ord("w^2"), ord("0"), ord("w+1"), ord("w"), ord("7"), ord("w^2+1")];
        v.sort();
        let shown: Vec<String> = v.iter().map(|o| o.to_string()).collect();
        assert_eq!(shown, ["0", "7", "w", "w+1", "w^2", "w^2+1"]);
    }

    #[test]
    fn omega_symbolic_above_everything() {
        assert!(OrdinalNotation::Omega > ord("w^9+w*4+100"));
        assert_eq!(OrdinalNotation::Omega.succ(), Err(OrdinalError::SymbolicUncountable));
    }

    #[test]
    fn successor_and_limits() {
        assert_eq!(ord("w").succ().unwrap(), ord("w+1"));
        assert_eq!(ord("3").succ().unwrap(), ord("4"));
        assert!(ord("w^2").is_limit());
        assert!(ord("w*4").is_limit());
        assert!(!ord("w+1").is_limit());
        assert!(!ord("0").is_limit());
    }

    #[test]
    fn natural_sum_on_used_shapes() {
        assert_eq!(ord("w*2").natural_sum(&ord("3")).unwrap(), ord("w*2+3"));
        assert_eq!(ord("w").natural_sum(&ord("w")).unwrap(), ord("w*2"));
    }
}
