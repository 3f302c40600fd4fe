//! Distance monoids: law checking, continuity at zero, coinitiality, nice
//! initial sequences, and the order completion with its induced addition.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ordinal::OrdinalNotation;
use crate::rational::ExtRational;

/// An element of a distance monoid, interpreted by a [`MonoidInstance`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum DistanceValue {
    /// Element of `ExtendedRational`.
    Rational(ExtRational),
    /// Index into a finite table's element list (ascending order).
    Index(usize),
    /// Ordinal notation in a reversed-ordinal monoid (larger notation means
    /// smaller distance; the notation equal to the height is the zero).
    Ordinal(OrdinalNotation),
}

/// Coinitiality descriptor: least order type of a sequence of nonzero
/// distances descending to 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CoinitDescriptor {
    Finite(u64),
    Omega,
    SymbolicUncountable,
}

/// A finite chain with an explicit addition table. Indices are the order:
/// element 0 is the monoid zero and the minimum.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteTable {
    pub names: Vec<String>,
    /// `add[i][j]` is the index of `names[i] + names[j]`.
    pub add: Vec<Vec<usize>>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MonoidInstance {
    FiniteTable(FiniteTable),
    ExtendedRational,
    /// Ordinal notations `b <= height` under the reversed order; the zero is
    /// the height itself and addition is the ordinal minimum.
    ReversedOrdinal { height: OrdinalNotation },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonoidError {
    #[error("malformed table: {0}")]
    MalformedTable(String),
    #[error("values belong to different monoid instances")]
    MixedInstances,
    #[error("value does not belong to this instance: {0}")]
    ForeignValue(String),
    #[error("monoid is not continuous at 0; no initial sequence exists")]
    NotContinuousAtZero,
    #[error("requested length {requested} is incompatible with coinitiality {descriptor:?}")]
    IncompatibleLength {
        requested: String,
        descriptor: CoinitDescriptor,
    },
    #[error("initial-sequence index {0} out of bounds or not resolvable")]
    BadIndex(String),
    #[error("not an embedding; witness {0}")]
    NotAnEmbedding(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MonoidLaw {
    Identity,
    Commutativity,
    Associativity,
    Monotonicity,
    MeetDistributivity,
}

impl fmt::Display for MonoidLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonoidLaw::Identity => "identity",
            MonoidLaw::Commutativity => "commutativity",
            MonoidLaw::Associativity => "associativity",
            MonoidLaw::Monotonicity => "monotonicity",
            MonoidLaw::MeetDistributivity => "meet-distributivity",
        };
        write!(f, "{s}")
    }
}

/// Outcome of a law check: pass, or the first violated law with a witness.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LawReport {
    Pass,
    Fail { law: MonoidLaw, witness: Vec<String> },
}

impl LawReport {
    pub fn passed(&self) -> bool {
        matches!(self, LawReport::Pass)
    }
}

impl MonoidInstance {
    pub fn zero(&self) -> DistanceValue {
        match self {
            MonoidInstance::FiniteTable(_) => DistanceValue::Index(0),
            MonoidInstance::ExtendedRational => DistanceValue::Rational(ExtRational::zero()),
            MonoidInstance::ReversedOrdinal { height } => DistanceValue::Ordinal(height.clone()),
        }
    }

    pub fn is_zero(&self, v: &DistanceValue) -> bool {
        v == &self.zero()
    }

    pub fn owns(&self, v: &DistanceValue) -> bool {
        match (self, v) {
            (MonoidInstance::FiniteTable(t), DistanceValue::Index(i)) => *i < t.names.len(),
            (MonoidInstance::ExtendedRational, DistanceValue::Rational(_)) => true,
            (MonoidInstance::ReversedOrdinal { height }, DistanceValue::Ordinal(b)) => b <= height,
            _ => false,
        }
    }

    pub fn add(&self, a: &DistanceValue, b: &DistanceValue) -> Result<DistanceValue, MonoidError> {
        match (self, a, b) {
            (MonoidInstance::FiniteTable(t), DistanceValue::Index(i), DistanceValue::Index(j))
                if *i < t.names.len() && *j < t.names.len() =>
            {
                Ok(DistanceValue::Index(t.add[*i][*j]))
            }
            (
                MonoidInstance::ExtendedRational,
                DistanceValue::Rational(x),
                DistanceValue::Rational(y),
            ) => Ok(DistanceValue::Rational(x.add(y))),
            (
                MonoidInstance::ReversedOrdinal { height },
                DistanceValue::Ordinal(x),
                DistanceValue::Ordinal(y),
            ) if x <= height && y <= height => {
                // Addition is the reversed-order join, i.e. the ordinal minimum.
                Ok(DistanceValue::Ordinal(x.min(y).clone()))
            }
            _ => Err(MonoidError::MixedInstances),
        }
    }

    /// Order comparison in the monoid order (for reversed ordinals this is the
    /// reverse of the notation order).
    pub fn cmp_values(&self, a: &DistanceValue, b: &DistanceValue) -> Result<Ordering, MonoidError> {
        match (self, a, b) {
            (MonoidInstance::FiniteTable(_), DistanceValue::Index(i), DistanceValue::Index(j)) => {
                Ok(i.cmp(j))
            }
            (
                MonoidInstance::ExtendedRational,
                DistanceValue::Rational(x),
                DistanceValue::Rational(y),
            ) => Ok(x.cmp(y)),
            (
                MonoidInstance::ReversedOrdinal { .. },
                DistanceValue::Ordinal(x),
                DistanceValue::Ordinal(y),
            ) => Ok(y.cmp(x)),
            _ => Err(MonoidError::MixedInstances),
        }
    }

    pub fn leq(&self, a: &DistanceValue, b: &DistanceValue) -> Result<bool, MonoidError> {
        Ok(self.cmp_values(a, b)? != Ordering::Greater)
    }

    /// Binary join (maximum) in the monoid order.
    pub fn join(&self, a: &DistanceValue, b: &DistanceValue) -> Result<DistanceValue, MonoidError> {
        Ok(if self.leq(a, b)? { b.clone() } else { a.clone() })
    }

    /// Binary meet (minimum) in the monoid order.
    pub fn meet(&self, a: &DistanceValue, b: &DistanceValue) -> Result<DistanceValue, MonoidError> {
        Ok(if self.leq(a, b)? { a.clone() } else { b.clone() })
    }

    /// `n * a`, derived by iterated addition.
    pub fn scale(&self, n: u64, a: &DistanceValue) -> Result<DistanceValue, MonoidError> {
        let mut acc = self.zero();
        for _ in 0..n {
            acc = self.add(&acc, a)?;
        }
        Ok(acc)
    }

    /// The canonical halving hook: a value `h` with `2 * h <= a` for nonzero
    /// `a` of a monoid continuous at 0.
    pub fn halve(&self, a: &DistanceValue) -> Result<DistanceValue, MonoidError> {
        match (self, a) {
            (MonoidInstance::ExtendedRational, DistanceValue::Rational(q)) => {
                Ok(DistanceValue::Rational(q.halve()))
            }
            (MonoidInstance::ReversedOrdinal { height }, DistanceValue::Ordinal(b)) => {
                // Addition is idempotent, so any strictly smaller distance
                // works; the successor notation is the canonical choice.
                let s = b.succ().map_err(|_| MonoidError::BadIndex(b.to_string()))?;
                if &s > height {
                    return Err(MonoidError::BadIndex(b.to_string()));
                }
                Ok(DistanceValue::Ordinal(s))
            }
            (MonoidInstance::FiniteTable(_), _) => Err(MonoidError::NotContinuousAtZero),
            _ => Err(MonoidError::MixedInstances),
        }
    }

    pub fn display_value(&self, v: &DistanceValue) -> String {
        match (self, v) {
            (MonoidInstance::FiniteTable(t), DistanceValue::Index(i)) if *i < t.names.len() => {
                t.names[*i].clone()
            }
            (_, DistanceValue::Rational(q)) => q.to_string(),
            (_, DistanceValue::Ordinal(o)) => o.to_string(),
            (_, DistanceValue::Index(i)) => format!("#{i}"),
        }
    }

    pub fn parse_value(&self, text: &str) -> Result<DistanceValue, MonoidError> {
        let t = text.trim();
        match self {
            MonoidInstance::FiniteTable(tab) => tab
                .names
                .iter()
                .position(|n| n == t)
                .map(DistanceValue::Index)
                .ok_or_else(|| MonoidError::ForeignValue(t.to_string())),
            MonoidInstance::ExtendedRational => ExtRational::parse(t)
                .map(DistanceValue::Rational)
                .map_err(|e| MonoidError::ForeignValue(e.to_string())),
            MonoidInstance::ReversedOrdinal { height } => {
                let o = OrdinalNotation::parse(t)
                    .map_err(|e| MonoidError::ForeignValue(e.to_string()))?;
                if &o > height {
                    return Err(MonoidError::ForeignValue(t.to_string()));
                }
                Ok(DistanceValue::Ordinal(o))
            }
        }
    }

    /// All elements of a finite table, in ascending order.
    pub fn finite_values(&self) -> Option<Vec<DistanceValue>> {
        match self {
            MonoidInstance::FiniteTable(t) => {
                Some((0..t.names.len()).map(DistanceValue::Index).collect())
            }
            _ => None,
        }
    }
}

/// Exhaustive law check for finite tables; sampled check otherwise.
///
/// The finite check verifies identity, commutativity, associativity,
/// monotonicity of `+` in both arguments, and meet-distributivity
/// `b + meet(A) = meet(a + b)` with `A` ranging over suffix sets of the chain
/// (every meet in a finite chain is the meet of a suffix set, so this is
/// exhaustive). Checks run in the order listed and the first violation wins.
pub fn check_monoid_axioms(instance: &MonoidInstance) -> Result<LawReport, MonoidError> {
    match instance {
        MonoidInstance::FiniteTable(t) => check_finite_table(t),
        _ => Ok(check_monoid_axioms_sampled(instance, 64, 0)),
    }
}

fn check_finite_table(t: &FiniteTable) -> Result<LawReport, MonoidError> {
    let n = t.names.len();
    if n == 0 {
        return Err(MonoidError::MalformedTable("empty element list".into()));
    }
    if t.add.len() != n || t.add.iter().any(|row| row.len() != n) {
        return Err(MonoidError::MalformedTable(format!(
            "addition table is not {n}x{n}"
        )));
    }
    if let Some(&bad) = t.add.iter().flatten().find(|&&e| e >= n) {
        return Err(MonoidError::MalformedTable(format!(
            "table entry index {bad} out of range"
        )));
    }
    let name = |i: usize| t.names[i].clone();

    for a in 0..n {
        if t.add[0][a] != a || t.add[a][0] != a {
            return Ok(LawReport::Fail {
                law: MonoidLaw::Identity,
                witness: vec![name(a)],
            });
        }
    }
    for a in 0..n {
        for b in 0..n {
            if t.add[a][b] != t.add[b][a] {
                return Ok(LawReport::Fail {
                    law: MonoidLaw::Commutativity,
                    witness: vec![name(a), name(b)],
                });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if t.add[t.add[a][b]][c] != t.add[a][t.add[b][c]] {
                    return Ok(LawReport::Fail {
                        law: MonoidLaw::Associativity,
                        witness: vec![name(a), name(b), name(c)],
                    });
                }
            }
        }
    }
    for c in 0..n {
        for a in 0..n {
            for b in a..n {
                // a <= b must give c+a <= c+b and a+c <= b+c.
                if t.add[c][a] > t.add[c][b] || t.add[a][c] > t.add[b][c] {
                    return Ok(LawReport::Fail {
                        law: MonoidLaw::Monotonicity,
                        witness: vec![name(c), name(a), name(b)],
                    });
                }
            }
        }
    }
    // Suffix sets {k, ..., n-1}, including the empty suffix whose meet is the
    // top of the chain.
    for b in 0..n {
        for k in 0..=n {
            let meet_a = if k == n { n - 1 } else { k };
            let lhs = t.add[b][meet_a];
            let rhs = (k..n).map(|a| t.add[a][b]).min().unwrap_or(n - 1);
            if lhs != rhs {
                return Ok(LawReport::Fail {
                    law: MonoidLaw::MeetDistributivity,
                    witness: vec![name(b), name(meet_a)],
                });
            }
        }
    }
    Ok(LawReport::Pass)
}

/// Randomized law check for the non-finite instances: identity, commutativity,
/// associativity, and monotonicity on sampled values, plus meet-distributivity
/// along sampled descending chains resolved through the instance hooks.
pub fn check_monoid_axioms_sampled(instance: &MonoidInstance, sample: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<DistanceValue> = (0..sample.max(4)).map(|_| sample_value(instance, &mut rng)).collect();
    let zero = instance.zero();
    for a in &vals {
        let l = instance.add(&zero, a).unwrap();
        let r = instance.add(a, &zero).unwrap();
        if &l != a || &r != a {
            return LawReport::Fail {
                law: MonoidLaw::Identity,
                witness: vec![instance.display_value(a)],
            };
        }
    }
    for pair in vals.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if instance.add(a, b).unwrap() != instance.add(b, a).unwrap() {
            return LawReport::Fail {
                law: MonoidLaw::Commutativity,
                witness: vec![instance.display_value(a), instance.display_value(b)],
            };
        }
    }
    for tri in vals.windows(3) {
        let (a, b, c) = (&tri[0], &tri[1], &tri[2]);
        let l = instance.add(&instance.add(a, b).unwrap(), c).unwrap();
        let r = instance.add(a, &instance.add(b, c).unwrap()).unwrap();
        if l != r {
            return LawReport::Fail {
                law: MonoidLaw::Associativity,
                witness: vec![
                    instance.display_value(a),
                    instance.display_value(b),
                    instance.display_value(c),
                ],
            };
        }
    }
    for tri in vals.windows(3) {
        let (c, x, y) = (&tri[0], &tri[1], &tri[2]);
        let (a, b) = if instance.leq(x, y).unwrap() { (x, y) } else { (y, x) };
        let ca = instance.add(c, a).unwrap();
        let cb = instance.add(c, b).unwrap();
        if !instance.leq(&ca, &cb).unwrap() {
            return LawReport::Fail {
                law: MonoidLaw::Monotonicity,
                witness: vec![
                    instance.display_value(c),
                    instance.display_value(a),
                    instance.display_value(b),
                ],
            };
        }
    }
    // Meet-distributivity along a finite descending chain: the meet of the
    // chain is its last element, so the identity is checkable exactly.
    for tri in vals.windows(3) {
        let b = &tri[0];
        let mut chain = vec![tri[1].clone(), tri[2].clone()];
        chain.sort_by(|x, y| instance.cmp_values(y, x).unwrap());
        let meet = chain.last().unwrap().clone();
        let lhs = instance.add(b, &meet).unwrap();
        let rhs = chain
            .iter()
            .map(|a| instance.add(a, b).unwrap())
            .reduce(|x, y| instance.meet(&x, &y).unwrap())
            .unwrap();
        if lhs != rhs {
            return LawReport::Fail {
                law: MonoidLaw::MeetDistributivity,
                witness: vec![instance.display_value(b)],
            };
        }
    }
    LawReport::Pass
}

fn sample_value(instance: &MonoidInstance, rng: &mut ChaCha8Rng) -> DistanceValue {
    match instance {
        MonoidInstance::FiniteTable(t) => DistanceValue::Index(rng.gen_range(0..t.names.len())),
        MonoidInstance::ExtendedRational => {
            if rng.gen_ratio(1, 16) {
                DistanceValue::Rational(ExtRational::Top)
            } else {
                let num = rng.gen_range(0..64i64);
                let den = rng.gen_range(1..64i64);
                DistanceValue::Rational(ExtRational::from_ints(num, den))
            }
        }
        MonoidInstance::ReversedOrdinal { height } => {
            let o = match height {
                OrdinalNotation::Omega => {
                    // Stay inside the CNF fragment below the symbolic height.
                    let e = rng.gen_range(0..3u64);
                    let c = rng.gen_range(1..8u64);
                    OrdinalNotation::Cnf(crate::ordinal::Cnf::monomial(e, c))
                }
                h => {
                    if rng.gen_bool(0.2) {
                        h.clone()
                    } else if let Some(n) = h.as_nat() {
                        OrdinalNotation::from_nat(rng.gen_range(0..n.max(1)))
                    } else {
                        OrdinalNotation::from_nat(rng.gen_range(0..32u64))
                    }
                }
            };
            DistanceValue::Ordinal(o)
        }
    }
}

/// `0 = meet over nonzero a, b of a + b`. Computed exactly on finite tables,
/// declared (with its justification in the instance semantics) otherwise.
pub fn is_continuous_at_zero(instance: &MonoidInstance) -> bool {
    match instance {
        MonoidInstance::FiniteTable(t) => {
            let n = t.names.len();
            if n <= 1 {
                // No nonzero pairs; the empty meet is the top of the chain,
                // which in the trivial monoid is 0.
                return true;
            }
            let mut min = n - 1;
            for a in 1..n {
                for b in 1..n {
                    min = min.min(t.add[a][b]);
                }
            }
            min == 0
        }
        MonoidInstance::ExtendedRational => true,
        // The meet of all nonzero notations resolves to the declared limit,
        // which is the height (the zero) exactly when the height is a limit.
        MonoidInstance::ReversedOrdinal { height } => height.is_limit(),
    }
}

pub fn coinitiality(instance: &MonoidInstance) -> CoinitDescriptor {
    let d = match instance {
        MonoidInstance::FiniteTable(_) => CoinitDescriptor::Finite(1),
        MonoidInstance::ExtendedRational => CoinitDescriptor::Omega,
        MonoidInstance::ReversedOrdinal { height } => match height {
            OrdinalNotation::Omega => CoinitDescriptor::SymbolicUncountable,
            h if h.is_limit() => CoinitDescriptor::Omega,
            _ => CoinitDescriptor::Finite(1),
        },
    };
    // A monoid continuous at 0 never has finite coinitiality (except the
    // degenerate trivial monoid, which has no nonzero elements at all).
    if is_continuous_at_zero(instance) && !matches!(instance, MonoidInstance::FiniteTable(t) if t.names.len() == 1)
    {
        debug_assert!(!matches!(d, CoinitDescriptor::Finite(_)));
    }
    d
}

/// How an initial sequence produces its entries.
#[derive(Clone, PartialEq, Eq, Debug)]
enum SeqKind {
    /// `entry(k) = start / 2^(halvings * k)` over `ExtendedRational`.
    Geometric { start: ExtRational, halvings: u32 },
    /// `entry(i) = succ(i)` over a reversed-ordinal monoid.
    RevOrdinalSucc,
}

/// A strictly order-reversing, coinitial map from an index notation into the
/// nonzero distances, with a declared niceness factor.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InitialSequence {
    instance: MonoidInstance,
    index_bound: OrdinalNotation,
    niceness_factor: u64,
    kind: SeqKind,
}

impl InitialSequence {
    pub fn instance(&self) -> &MonoidInstance {
        &self.instance
    }

    pub fn index_bound(&self) -> &OrdinalNotation {
        &self.index_bound
    }

    pub fn niceness_factor(&self) -> u64 {
        self.niceness_factor
    }

    pub fn entry(&self, i: &OrdinalNotation) -> Result<DistanceValue, MonoidError> {
        if i >= &self.index_bound {
            return Err(MonoidError::BadIndex(i.to_string()));
        }
        match &self.kind {
            SeqKind::Geometric { start, halvings } => {
                let k = i
                    .as_nat()
                    .ok_or_else(|| MonoidError::BadIndex(i.to_string()))?;
                let mut v = start.clone();
                for _ in 0..(*halvings as u64 * k) {
                    v = v.halve();
                }
                Ok(DistanceValue::Rational(v))
            }
            SeqKind::RevOrdinalSucc => {
                let s = i.succ().map_err(|_| MonoidError::BadIndex(i.to_string()))?;
                Ok(DistanceValue::Ordinal(s))
            }
        }
    }

    pub fn entry_nat(&self, k: u64) -> Result<DistanceValue, MonoidError> {
        self.entry(&OrdinalNotation::from_nat(k))
    }

    /// Coinitiality spot check: an index `i` with `entry(i) <= a`.
    pub fn index_below(&self, a: &DistanceValue) -> Result<OrdinalNotation, MonoidError> {
        match &self.kind {
            SeqKind::Geometric { .. } => {
                let mut k = 0u64;
                loop {
                    let e = self.entry_nat(k)?;
                    if self.instance.leq(&e, a)? {
                        return Ok(OrdinalNotation::from_nat(k));
                    }
                    k += 1;
                    if OrdinalNotation::from_nat(k) >= self.index_bound {
                        return Err(MonoidError::BadIndex(format!(
                            "no entry below {}",
                            self.instance.display_value(a)
                        )));
                    }
                }
            }
            SeqKind::RevOrdinalSucc => match a {
                // entry(i) = i+1 >= b in notation order, i.e. <= as distances.
                DistanceValue::Ordinal(b) => {
                    if self.instance.is_zero(a) {
                        Err(MonoidError::BadIndex("zero has no nonzero bound".into()))
                    } else {
                        Ok(b.clone())
                    }
                }
                _ => Err(MonoidError::MixedInstances),
            },
        }
    }
}

/// Builds a nice initial sequence by iterating the instance's canonical
/// halving hook enough times per step to guarantee `factor * a(k+1) <= a(k)`.
pub fn nice_initial_sequence(
    instance: &MonoidInstance,
    factor: u64,
    length: OrdinalNotation,
) -> Result<InitialSequence, MonoidError> {
    if !is_continuous_at_zero(instance) || matches!(instance, MonoidInstance::FiniteTable(_)) {
        return Err(MonoidError::NotContinuousAtZero);
    }
    match (instance, coinitiality(instance)) {
        (MonoidInstance::ExtendedRational, CoinitDescriptor::Omega) => {
            if length.as_nat().is_none() && length != OrdinalNotation::omega() {
                return Err(MonoidError::IncompatibleLength {
                    requested: length.to_string(),
                    descriptor: CoinitDescriptor::Omega,
                });
            }
            // Each step halves ceil(log2(factor)) times, so factor * next <= 2^h * next = cur.
            let mut halvings = 0u32;
            while (1u64 << halvings) < factor {
                halvings += 1;
            }
            Ok(InitialSequence {
                instance: instance.clone(),
                index_bound: length,
                niceness_factor: factor,
                kind: SeqKind::Geometric {
                    start: ExtRational::one(),
                    halvings: halvings.max(1),
                },
            })
        }
        (MonoidInstance::ReversedOrdinal { height }, _) => {
            if &length > height {
                return Err(MonoidError::IncompatibleLength {
                    requested: length.to_string(),
                    descriptor: coinitiality(instance),
                });
            }
            // Addition is idempotent (n * a = a), so the successor walk is
            // nice for every factor.
            Ok(InitialSequence {
                instance: instance.clone(),
                index_bound: length,
                niceness_factor: factor,
                kind: SeqKind::RevOrdinalSucc,
            })
        }
        _ => Err(MonoidError::NotContinuousAtZero),
    }
}

/// The canonical full-length initial sequence of an instance (length equal to
/// its natural index bound: omega for rationals, the height for reversed
/// ordinals).
pub fn canonical_initial_sequence(
    instance: &MonoidInstance,
    factor: u64,
) -> Result<InitialSequence, MonoidError> {
    let length = match instance {
        MonoidInstance::ExtendedRational => OrdinalNotation::omega(),
        MonoidInstance::ReversedOrdinal { height } => height.clone(),
        MonoidInstance::FiniteTable(_) => return Err(MonoidError::NotContinuousAtZero),
    };
    nice_initial_sequence(instance, factor, length)
}

type BoundFn = Arc<dyn Fn(u64) -> DistanceValue + Send + Sync>;

/// An element of the order completion: either the cut generated by a finite
/// set of base elements (equivalently, the principal cut of their maximum) or
/// a cut described by a descending stream of upper bounds with an optional
/// declared meet.
#[derive(Clone)]
pub enum CutElement {
    Finite {
        instance: MonoidInstance,
        generators: Vec<DistanceValue>,
    },
    Stream {
        instance: MonoidInstance,
        bounds: BoundFn,
        declared_meet: Option<DistanceValue>,
    },
}

impl fmt::Debug for CutElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutElement::Finite { instance, generators } => {
                let gens: Vec<String> = generators.iter().map(|g| instance.display_value(g)).collect();
                write!(f, "Cut[{}]", gens.join(","))
            }
            CutElement::Stream { instance, bounds, .. } => {
                let head: Vec<String> = (0..3).map(|n| instance.display_value(&bounds(n))).collect();
                write!(f, "StreamCut[{}, ...]", head.join(","))
            }
        }
    }
}

impl CutElement {
    pub fn principal(instance: &MonoidInstance, v: DistanceValue) -> CutElement {
        CutElement::Finite {
            instance: instance.clone(),
            generators: vec![v],
        }
    }

    pub fn from_stream(
        instance: &MonoidInstance,
        bounds: BoundFn,
        declared_meet: Option<DistanceValue>,
    ) -> CutElement {
        CutElement::Stream {
            instance: instance.clone(),
            bounds,
            declared_meet,
        }
    }

    pub fn instance(&self) -> &MonoidInstance {
        match self {
            CutElement::Finite { instance, .. } | CutElement::Stream { instance, .. } => instance,
        }
    }

    /// The value of a finite-generator cut: since the generated downset in a
    /// chain is the downset of the maximum generator, the cut is principal.
    pub fn principal_value(&self) -> Option<DistanceValue> {
        match self {
            CutElement::Finite { instance, generators } => {
                let mut best = generators.first()?.clone();
                for g in &generators[1..] {
                    best = instance.join(&best, g).ok()?;
                }
                Some(best)
            }
            CutElement::Stream { declared_meet, .. } => declared_meet.clone(),
        }
    }

    /// The n-th upper bound of the cut (constant for finite-generator cuts).
    pub fn bound(&self, n: u64) -> Result<DistanceValue, MonoidError> {
        match self {
            CutElement::Finite { .. } => self
                .principal_value()
                .ok_or_else(|| MonoidError::MalformedTable("empty generator set".into())),
            CutElement::Stream { bounds, .. } => Ok(bounds(n)),
        }
    }

    /// Inclusion of generated downsets, decidable for finite generator sets.
    pub fn leq_finite(&self, other: &CutElement) -> Result<bool, MonoidError> {
        if self.instance() != other.instance() {
            return Err(MonoidError::MixedInstances);
        }
        match (self.principal_value(), other.principal_value()) {
            (Some(a), Some(b)) => self.instance().leq(&a, &b),
            _ => Err(MonoidError::BadIndex("comparison needs resolved cuts".into())),
        }
    }

    /// Stage-checked strict domination: `v` is strictly below every bound of
    /// the cut up to the stage. Sound for "v < cut" on descending streams.
    pub fn strictly_above(&self, v: &DistanceValue, stage: u64) -> Result<bool, MonoidError> {
        for n in 0..=stage {
            let b = self.bound(n)?;
            if self.instance().cmp_values(v, &b)? != Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `a +* b = meet over base approximants a' >= a, b' >= b of a' + b'`.
///
/// Finite-generator cuts are computed exactly as the cut generated by
/// pairwise sums of generators; cuts with a stream side return a stream whose
/// n-th bound is the sum of the n-th bounds.
pub fn completion_add(a: &CutElement, b: &CutElement) -> Result<CutElement, MonoidError> {
    let instance = a.instance().clone();
    if &instance != b.instance() {
        return Err(MonoidError::MixedInstances);
    }
    match (a, b) {
        (
            CutElement::Finite { generators: ga, .. },
            CutElement::Finite { generators: gb, .. },
        ) => {
            let mut sums = Vec::new();
            for x in ga {
                for y in gb {
                    let s = instance.add(x, y)?;
                    if !sums.contains(&s) {
                        sums.push(s);
                    }
                }
            }
            Ok(CutElement::Finite {
                instance,
                generators: sums,
            })
        }
        _ => {
            let (ba, bb) = (a.clone(), b.clone());
            let meet = match (a.principal_value(), b.principal_value()) {
                (Some(x), Some(y)) => Some(instance.add(&x, &y)?),
                _ => None,
            };
            let inst = instance.clone();
            Ok(CutElement::Stream {
                instance,
                bounds: Arc::new(move |n| {
                    let x = ba.bound(n).expect("stream bound");
                    let y = bb.bound(n).expect("stream bound");
                    inst.add(&x, &y).expect("same instance")
                }),
                declared_meet: meet,
            })
        }
    }
}

/// A sampled order- and addition-preserving injection between instances,
/// extendable to cuts.
pub struct Embedding {
    base: MonoidInstance,
    target: MonoidInstance,
    map: Arc<dyn Fn(&DistanceValue) -> DistanceValue + Send + Sync>,
}

impl Embedding {
    pub fn apply(&self, v: &DistanceValue) -> DistanceValue {
        (self.map)(v)
    }

    /// `j(cut) = meet of images of the generators` (image cut in the target).
    pub fn apply_cut(&self, cut: &CutElement) -> Result<CutElement, MonoidError> {
        if cut.instance() != &self.base {
            return Err(MonoidError::MixedInstances);
        }
        match cut {
            CutElement::Finite { generators, .. } => Ok(CutElement::Finite {
                instance: self.target.clone(),
                generators: generators.iter().map(|g| self.apply(g)).collect(),
            }),
            CutElement::Stream { bounds, declared_meet, .. } => {
                let map = self.map.clone();
                let inner = bounds.clone();
                Ok(CutElement::Stream {
                    instance: self.target.clone(),
                    bounds: Arc::new(move |n| map(&inner(n))),
                    declared_meet: declared_meet.as_ref().map(|m| self.apply(m)),
                })
            }
        }
    }
}

/// Verifies on the sample that `map` preserves zero, order, and addition,
/// then extends it to cuts.
pub fn embed_into_complete(
    base: &MonoidInstance,
    target: &MonoidInstance,
    map: Arc<dyn Fn(&DistanceValue) -> DistanceValue + Send + Sync>,
    sample: &[DistanceValue],
) -> Result<Embedding, MonoidError> {
    let witness = |a: &DistanceValue, b: &DistanceValue| {
        MonoidError::NotAnEmbedding(format!(
            "({}, {})",
            base.display_value(a),
            base.display_value(b)
        ))
    };
    if map(&base.zero()) != target.zero() {
        return Err(MonoidError::NotAnEmbedding("0".into()));
    }
    for a in sample {
        for b in sample {
            let (ia, ib) = (map(a), map(b));
            if base.leq(a, b)? != target.leq(&ia, &ib)? {
                return Err(witness(a, b));
            }
            if (a == b) != (ia == ib) {
                return Err(witness(a, b));
            }
            let sum = map(&base.add(a, b)?);
            if sum != target.add(&ia, &ib)? {
                return Err(witness(a, b));
            }
        }
    }
    Ok(Embedding {
        base: base.clone(),
        target: target.clone(),
        map,
    })
}

/// Parses the line-based monoid description format.
///
/// ```text
/// monoid finite
/// elems 0 1 2 top
/// 0 1 2 top
/// 1 2 top top
/// 2 top top top
/// top top top top
/// ```
///
/// `monoid rational` has no further lines; `monoid revordinal` is followed by
/// `height <cnf or omega-1>`.
pub fn parse_monoid(text: &str) -> Result<MonoidInstance, MonoidError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(MonoidError::Parse {
        line: 0,
        msg: "empty file".into(),
    })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("monoid") {
        return Err(MonoidError::Parse {
            line: hline,
            msg: "expected `monoid finite|rational|revordinal`".into(),
        });
    }
    match parts.next() {
        Some("rational") => Ok(MonoidInstance::ExtendedRational),
        Some("revordinal") => {
            let (l, line) = lines.next().ok_or(MonoidError::Parse {
                line: hline,
                msg: "missing height line".into(),
            })?;
            let h = line.strip_prefix("height").ok_or(MonoidError::Parse {
                line: l,
                msg: "expected `height <notation>`".into(),
            })?;
            let height = OrdinalNotation::parse(h).map_err(|e| MonoidError::Parse {
                line: l,
                msg: e.to_string(),
            })?;
            Ok(MonoidInstance::ReversedOrdinal { height })
        }
        Some("finite") => {
            let (l, line) = lines.next().ok_or(MonoidError::Parse {
                line: hline,
                msg: "missing elems line".into(),
            })?;
            let elems = line.strip_prefix("elems").ok_or(MonoidError::Parse {
                line: l,
                msg: "expected `elems e0 e1 ...`".into(),
            })?;
            let names: Vec<String> = elems.split_whitespace().map(str::to_string).collect();
            if names.is_empty() {
                return Err(MonoidError::Parse {
                    line: l,
                    msg: "no elements".into(),
                });
            }
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(MonoidError::Parse {
                        line: l,
                        msg: format!("duplicate element name {n:?}"),
                    });
                }
            }
            let mut add = Vec::new();
            for _ in 0..names.len() {
                let (l, line) = lines.next().ok_or(MonoidError::Parse {
                    line: hline,
                    msg: format!("expected {} table rows", names.len()),
                })?;
                let row: Result<Vec<usize>, MonoidError> = line
                    .split_whitespace()
                    .map(|tok| {
                        names.iter().position(|n| n == tok).ok_or(MonoidError::Parse {
                            line: l,
                            msg: format!("unknown element {tok:?} in table row"),
                        })
                    })
                    .collect();
                let row = row?;
                if row.len() != names.len() {
                    return Err(MonoidError::Parse {
                        line: l,
                        msg: format!("row has {} entries, expected {}", row.len(), names.len()),
                    });
                }
                add.push(row);
            }
            Ok(MonoidInstance::FiniteTable(FiniteTable { names, add }))
        }
        other => Err(MonoidError::Parse {
            line: hline,
            msg: format!("unknown monoid kind {other:?}"),
        }),
    }
}

/// Serializes an instance back to the description format; `parse_monoid` of
/// the output yields an equal instance.
pub fn serialize_monoid(instance: &MonoidInstance) -> String {
    match instance {
        MonoidInstance::ExtendedRational => "monoid rational\n".to_string(),
        MonoidInstance::ReversedOrdinal { height } => {
            format!("monoid revordinal\nheight {height}\n")
        }
        MonoidInstance::FiniteTable(t) => {
            let mut out = String::from("monoid finite\n");
            out.push_str("elems ");
            out.push_str(&t.names.join(" "));
            out.push('\n');
            for row in &t.add {
                let names: Vec<&str> = row.iter().map(|&i| t.names[i].as_str()).collect();
                out.push_str(&names.join(" "));
                out.push('\n');
            }
            out
        }
    }
}

/// The clamped chain `{0, 1, 2, top}`: addition is truncated natural addition.
pub fn chain4() -> MonoidInstance {
    MonoidInstance::FiniteTable(FiniteTable {
        names: vec!["0".into(), "1".into(), "2".into(), "top".into()],
        add: vec![
            vec![0, 1, 2, 3],
            vec![1, 2, 3, 3],
            vec![2, 3, 3, 3],
            vec![3, 3, 3, 3],
        ],
    })
}

/// The trivial monoid `{0}`.
pub fn trivial() -> MonoidInstance {
    MonoidInstance::FiniteTable(FiniteTable {
        names: vec!["0".into()],
        add: vec![vec![0]],
    })
}
