//! Dynamical systems `(M, f)` with a non-expanding self-map and the certified
//! fixed-point decision procedure: iterative deepening over the approximation
//! tree of dense-point chains `<x_0, ..., x_{n-1}>` with
//! `d(x_i, x_j) <= alpha(i) + alpha(j)` and `d(x_i, g(x_i)) <= alpha(i)` both
//! ways. The tree is ill-founded exactly when a fixed point exists.

use std::sync::Arc;

use thiserror::Error;

use crate::monoid::{
    coinitiality, CoinitDescriptor, DistanceValue, InitialSequence, MonoidError,
};
use crate::treespace::{KappaTree, TreeNode, TreePath};
use crate::wspace::{CauchySequence, Point, SelfMap, SpaceError, WSpace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynError {
    #[error("coinitiality descriptor {0:?} is not Omega; the certificate theory does not apply")]
    WrongCoinitiality(CoinitDescriptor),
    #[error("width budget {0} cannot cover the finite dense set")]
    BudgetTooSmall(usize),
    #[error("chain violates the pairwise bound at ({0}, {1})")]
    InvalidChain(u64, u64),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DenseSet {
    /// All points of a finite presentation; enumeration is provably
    /// exhaustible.
    AllFinitePoints,
    /// Tree nodes of a lazy presentation; never exhausted by a width budget.
    TreeNodes,
}

#[derive(Clone, PartialEq, Debug)]
pub struct DynSystem {
    pub space: Arc<WSpace>,
    pub map: SelfMap,
    pub alpha: InitialSequence,
    pub dense: DenseSet,
}

impl DynSystem {
    /// Dense enumeration prefix and whether it provably exhausts the set.
    fn dense_points(&self, width: usize) -> (Vec<Point>, bool) {
        match self.dense {
            DenseSet::AllFinitePoints => {
                let all = self.space.points(usize::MAX);
                let exhausted = all.len() <= width;
                (all.into_iter().take(width).collect(), exhausted)
            }
            DenseSet::TreeNodes => (self.space.points(width), false),
        }
    }
}

/// A valid node of the approximation tree.
#[derive(Clone, PartialEq, Debug)]
pub struct ApproxChainNode {
    pub entries: Vec<Point>,
    pub alpha: InitialSequence,
}

#[derive(Clone, PartialEq, Debug)]
pub enum SearchOutcome {
    FixedPointFound {
        witness: Point,
        residual: DistanceValue,
    },
    CertifiedNoFixedPoint {
        empty_depth: u64,
    },
    BudgetExhausted {
        best: ApproxChainNode,
        depth: u64,
    },
}

fn chain_extension_ok(
    system: &DynSystem,
    chain: &[Point],
    x: &Point,
) -> Result<bool, DynError> {
    let space = system.space.as_ref();
    let m = &space.monoid;
    let k = chain.len() as u64;
    let ak = system.alpha.entry_nat(k)?;
    let fx = system.map.apply(space, x)?;
    if !m.leq(&space.distance(x, &fx)?, &ak)? || !m.leq(&space.distance(&fx, x)?, &ak)? {
        return Ok(false);
    }
    for (i, xi) in chain.iter().enumerate() {
        let bound = m.add(&system.alpha.entry_nat(i as u64)?, &ak)?;
        if !m.leq(&space.distance(xi, x)?, &bound)?
            || !m.leq(&space.distance(x, xi)?, &bound)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn dfs_all(
    system: &DynSystem,
    cands: &[Point],
    chain: &mut Vec<Point>,
    depth: usize,
    out: &mut Vec<Vec<Point>>,
    max_out: usize,
) -> Result<(), DynError> {
    if chain.len() == depth {
        if out.len() < max_out {
            out.push(chain.clone());
        }
        return Ok(());
    }
    for x in cands {
        if out.len() >= max_out {
            return Ok(());
        }
        if chain_extension_ok(system, chain, x)? {
            chain.push(x.clone());
            dfs_all(system, cands, chain, depth, out, max_out)?;
            chain.pop();
        }
    }
    Ok(())
}

fn dfs_first(
    system: &DynSystem,
    cands: &[Point],
    chain: &mut Vec<Point>,
    depth: usize,
) -> Result<Option<Vec<Point>>, DynError> {
    if chain.len() == depth {
        return Ok(Some(chain.clone()));
    }
    for x in cands {
        if chain_extension_ok(system, chain, x)? {
            chain.push(x.clone());
            if let Some(found) = dfs_first(system, cands, chain, depth)? {
                return Ok(Some(found));
            }
            chain.pop();
        }
    }
    Ok(None)
}

/// All depth-`n` approximation-tree nodes over the first `width` dense
/// points, in lexicographic order of the dense enumeration.
pub fn level_nodes(
    system: &DynSystem,
    depth: u64,
    width: usize,
) -> Result<Vec<ApproxChainNode>, DynError> {
    let (cands, exhausted) = system.dense_points(width);
    if system.dense == DenseSet::AllFinitePoints && !exhausted {
        return Err(DynError::BudgetTooSmall(width));
    }
    let mut out = Vec::new();
    dfs_all(system, &cands, &mut Vec::new(), depth as usize, &mut out, 1_000_000)?;
    Ok(out
        .into_iter()
        .map(|entries| ApproxChainNode {
            entries,
            alpha: system.alpha.clone(),
        })
        .collect())
}

fn exactly_fixed(system: &DynSystem, x: &Point) -> Result<bool, DynError> {
    let space = system.space.as_ref();
    let m = &space.monoid;
    let fx = system.map.apply(space, x)?;
    Ok(m.is_zero(&space.distance(x, &fx)?) && m.is_zero(&space.distance(&fx, x)?))
}

fn search(
    system: &DynSystem,
    depth_budget: u64,
    width_budget: usize,
    certify: bool,
) -> Result<SearchOutcome, DynError> {
    let (cands, exhausted) = system.dense_points(width_budget);
    let mut best: Option<Vec<Point>> = None;
    for depth in 1..=depth_budget {
        match dfs_first(system, &cands, &mut Vec::new(), depth as usize)? {
            None => {
                if certify && exhausted {
                    return Ok(SearchOutcome::CertifiedNoFixedPoint { empty_depth: depth });
                }
                return Ok(SearchOutcome::BudgetExhausted {
                    best: ApproxChainNode {
                        entries: best.unwrap_or_default(),
                        alpha: system.alpha.clone(),
                    },
                    depth,
                });
            }
            Some(chain) => {
                // A chain entry forced below every realized nonzero distance
                // is exactly fixed; check the deepest (tightest) entry.
                let last = chain.last().expect("depth >= 1").clone();
                best = Some(chain);
                if exactly_fixed(system, &last)? {
                    return Ok(SearchOutcome::FixedPointFound {
                        witness: last,
                        residual: system.space.monoid.zero(),
                    });
                }
            }
        }
    }
    let surviving = best.expect("depth_budget >= 1 and every level was nonempty");
    // A surviving branch resolves to a limit point only when the
    // presentation supplies one: binary-tree branches resolve to paths.
    if let Some(t) = system.space.tree_data() {
        if matches!(t.tree, KappaTree::Binary { .. }) && t.include_paths {
            if let Some(Point::Node(TreeNode::Bits(bits))) = surviving.last() {
                return Ok(SearchOutcome::FixedPointFound {
                    witness: Point::Path(TreePath::from_stem(bits.clone())),
                    residual: system.alpha.entry_nat(depth_budget)?,
                });
            }
        }
    }
    Ok(SearchOutcome::BudgetExhausted {
        best: ApproxChainNode {
            entries: surviving,
            alpha: system.alpha.clone(),
        },
        depth: depth_budget,
    })
}

/// The decision procedure, sound-complete under coinitiality omega. A level
/// found empty with the dense enumeration provably exhausted certifies that
/// no fixed point exists; a surviving branch resolvable by the presentation
/// yields a witness with residual `alpha(depth_budget)`.
pub fn decide_fixed_point(
    system: &DynSystem,
    depth_budget: u64,
    width_budget: usize,
) -> Result<SearchOutcome, DynError> {
    let descriptor = coinitiality(&system.space.monoid);
    if descriptor != CoinitDescriptor::Omega {
        return Err(DynError::WrongCoinitiality(descriptor));
    }
    search(system, depth_budget, width_budget, true)
}

/// Bounded exploration without the coinitiality hypothesis: never certifies
/// emptiness, used for symbolic-uncountable tree systems.
pub fn bounded_search(
    system: &DynSystem,
    depth_budget: u64,
    width_budget: usize,
) -> Result<SearchOutcome, DynError> {
    search(system, depth_budget, width_budget, false)
}

/// Packages a valid chain prefix as the proof's Cauchy sequence
/// `y(alpha(i)) = x_i`.
pub fn branch_to_limit(
    system: &DynSystem,
    chain: &[Point],
) -> Result<CauchySequence, DynError> {
    let space = system.space.as_ref();
    let m = &space.monoid;
    for i in 0..chain.len() {
        for j in i..chain.len() {
            let bound = m.add(
                &system.alpha.entry_nat(i as u64)?,
                &system.alpha.entry_nat(j as u64)?,
            )?;
            let d = space.distance(&chain[i], &chain[j])?;
            let rd = space.distance(&chain[j], &chain[i])?;
            if !m.leq(&d, &bound)? || !m.leq(&rd, &bound)? {
                return Err(DynError::InvalidChain(i as u64, j as u64));
            }
        }
    }
    if chain.is_empty() {
        return Err(DynError::InvalidChain(0, 0));
    }
    if let Some(Point::Node(TreeNode::Bits(bits))) = chain.last() {
        let path = TreePath::from_stem(bits.clone());
        return Ok(CauchySequence::branch_with_entries(
            system.space.clone(),
            system.alpha.clone(),
            chain.to_vec(),
            path,
        )?);
    }
    Ok(CauchySequence::eventually_constant(
        system.space.clone(),
        system.alpha.clone(),
        chain.to_vec(),
    )?)
}
