//! Quasi-metric spaces valued in a distance monoid, Cauchy sequences indexed
//! by initial sequences, stage-bounded sequence distance, and Cauchy
//! completion. The identity law is two-sided (`d(x,y) v d(y,x) = 0` iff
//! `x = y`); symmetry is never assumed.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::monoid::{
    is_continuous_at_zero, DistanceValue, InitialSequence, MonoidError, MonoidInstance,
};
use crate::treespace::{KappaTree, TreeError, TreeNode, TreePath};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("unknown point: {0}")]
    UnknownPoint(String),
    #[error("sequences live in different spaces")]
    DifferentSpaces,
    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),
    #[error("cauchy bound violated at indices ({0}, {1})")]
    CauchyBound(u64, u64),
    #[error("map extension unresolved: {0}")]
    UnresolvedExtension(String),
    #[error("stage {0} exceeds the refinement cap")]
    BadStage(u64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Stage refinement cap for sequence-distance bounds.
const STAGE_CAP: u64 = 512;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Point {
    /// Named point of a finite presentation.
    Sym(String),
    /// Tree node of a lazy tree presentation.
    Node(TreeNode),
    /// Path point adjoined by completion of a tree presentation.
    Path(TreePath),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Sym(s) => write!(f, "{s}"),
            Point::Node(n) => write!(f, "{n}"),
            Point::Path(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CompletenessStatus {
    Unknown,
    /// Finite realized distances: every Cauchy sequence is eventually
    /// constant, or the monoid is not continuous at 0.
    ComputedComplete,
    /// Tree space with paths adjoined.
    DerivedComplete,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeSpaceData {
    pub tree: KappaTree,
    pub alpha: InitialSequence,
    pub include_paths: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Presentation {
    Finite {
        points: Vec<String>,
        /// `matrix[i][j] = d(points[i], points[j])`.
        matrix: Vec<Vec<DistanceValue>>,
    },
    Tree(TreeSpaceData),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WSpace {
    pub monoid: MonoidInstance,
    pub presentation: Presentation,
    pub completeness: CompletenessStatus,
}

impl WSpace {
    pub fn finite(
        monoid: MonoidInstance,
        points: Vec<String>,
        matrix: Vec<Vec<DistanceValue>>,
    ) -> Result<WSpace, SpaceError> {
        let n = points.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(SpaceError::MalformedMatrix(format!(
                "expected a {n}x{n} matrix"
            )));
        }
        for row in &matrix {
            for v in row {
                if !monoid.owns(v) {
                    return Err(SpaceError::MalformedMatrix(
                        "matrix entry outside the monoid".into(),
                    ));
                }
            }
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(SpaceError::MalformedMatrix("duplicate point name".into()));
        }
        Ok(WSpace {
            monoid,
            presentation: Presentation::Finite { points, matrix },
            completeness: CompletenessStatus::Unknown,
        })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.presentation, Presentation::Finite { .. })
    }

    pub fn tree_data(&self) -> Option<&TreeSpaceData> {
        match &self.presentation {
            Presentation::Tree(t) => Some(t),
            _ => None,
        }
    }

    fn point_index(&self, p: &Point) -> Result<usize, SpaceError> {
        match (&self.presentation, p) {
            (Presentation::Finite { points, .. }, Point::Sym(s)) => points
                .iter()
                .position(|q| q == s)
                .ok_or_else(|| SpaceError::UnknownPoint(s.clone())),
            _ => Err(SpaceError::UnknownPoint(p.to_string())),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&self.presentation, p) {
            (Presentation::Finite { .. }, Point::Sym(_)) => self.point_index(p).is_ok(),
            (Presentation::Tree(t), Point::Node(n)) => t.tree.validate_node(n).is_ok(),
            (Presentation::Tree(t), Point::Path(_)) => {
                t.include_paths && matches!(t.tree, KappaTree::Binary { .. })
            }
            _ => false,
        }
    }

    /// Point enumeration in presentation order, truncated to `budget`. Tree
    /// spaces with paths also surface the canonical leftmost path.
    pub fn points(&self, budget: usize) -> Vec<Point> {
        match &self.presentation {
            Presentation::Finite { points, .. } => points
                .iter()
                .take(budget)
                .map(|s| Point::Sym(s.clone()))
                .collect(),
            Presentation::Tree(t) => {
                let mut out: Vec<Point> = t
                    .tree
                    .enumerate_nodes(budget)
                    .into_iter()
                    .map(Point::Node)
                    .collect();
                if t.include_paths && matches!(t.tree, KappaTree::Binary { .. }) {
                    out.push(Point::Path(TreePath::leftmost()));
                    out.truncate(budget.max(1));
                }
                out
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<DistanceValue, SpaceError> {
        if x == y {
            return Ok(self.monoid.zero());
        }
        match &self.presentation {
            Presentation::Finite { matrix, .. } => {
                let i = self.point_index(x)?;
                let j = self.point_index(y)?;
                Ok(matrix[i][j].clone())
            }
            Presentation::Tree(t) => {
                let join = match (x, y) {
                    (Point::Node(a), Point::Node(b)) => t.tree.join_nodes(a, b)?,
                    (Point::Node(a), Point::Path(p)) | (Point::Path(p), Point::Node(a)) => {
                        p.join_with_node(a)?
                    }
                    (Point::Path(p), Point::Path(q)) => match p.join_with_path(q) {
                        Some(j) => j,
                        None => return Ok(self.monoid.zero()),
                    },
                    _ => return Err(SpaceError::UnknownPoint(x.to_string())),
                };
                if join >= t.tree.height() {
                    // Equal-branch degenerate case: the diagonal convention.
                    return Ok(self.monoid.zero());
                }
                Ok(t.alpha.entry(&join)?)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SpaceLaw {
    Identity,
    Triangle,
    NonExpansion,
}

impl fmt::Display for SpaceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceLaw::Identity => "identity",
            SpaceLaw::Triangle => "triangle",
            SpaceLaw::NonExpansion => "non-expansion",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SpaceReport {
    Pass,
    Fail { law: SpaceLaw, witness: Vec<String> },
}

impl SpaceReport {
    pub fn passed(&self) -> bool {
        matches!(self, SpaceReport::Pass)
    }
}

/// Exhaustive law check on finite presentations; sampled (over the first
/// `budget` enumerated points) on tree presentations.
pub fn check_space_axioms(space: &WSpace) -> Result<SpaceReport, SpaceError> {
    let budget = if space.is_finite() { usize::MAX } else { 24 };
    check_space_axioms_budgeted(space, budget)
}

pub fn check_space_axioms_budgeted(
    space: &WSpace,
    budget: usize,
) -> Result<SpaceReport, SpaceError> {
    let pts = space.points(budget.min(10_000));
    let m = &space.monoid;
    for x in &pts {
        for y in &pts {
            let dxy = space.distance(x, y)?;
            let dyx = space.distance(y, x)?;
            let joined = m.join(&dxy, &dyx)?;
            if (x == y) != m.is_zero(&joined) {
                return Ok(SpaceReport::Fail {
                    law: SpaceLaw::Identity,
                    witness: vec![x.to_string(), y.to_string()],
                });
            }
        }
    }
    for x in &pts {
        for y in &pts {
            for z in &pts {
                let dxz = space.distance(x, z)?;
                let thru = m.add(&space.distance(x, y)?, &space.distance(y, z)?)?;
                if !m.leq(&dxz, &thru)? {
                    return Ok(SpaceReport::Fail {
                        law: SpaceLaw::Triangle,
                        witness: vec![x.to_string(), y.to_string(), z.to_string()],
                    });
                }
            }
        }
    }
    Ok(SpaceReport::Pass)
}

/// A Cauchy sequence restricted to (the range of) an initial sequence.
/// `assign(i)` must satisfy `d(assign(i), assign(j)) <= alpha(i) + alpha(j)`.
#[derive(Clone, PartialEq, Debug)]
pub struct CauchySequence {
    space: Arc<WSpace>,
    alpha: InitialSequence,
    assign: Assign,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Assign {
    /// `assign(i) = prefix[min(i, len - 1)]`; nonempty.
    EventuallyConstant { prefix: Vec<Point> },
    /// Explicit entries, then nodes along a binary-tree path:
    /// `assign(i) = entries[i]` for `i < len`, else the path's level-`i` node.
    Branch { entries: Vec<Point>, path: TreePath },
}

impl CauchySequence {
    pub fn constant(space: Arc<WSpace>, alpha: InitialSequence, x: Point) -> CauchySequence {
        CauchySequence {
            space,
            alpha,
            assign: Assign::EventuallyConstant { prefix: vec![x] },
        }
    }

    /// Validates the Cauchy bound on the prefix (including the constant tail).
    pub fn eventually_constant(
        space: Arc<WSpace>,
        alpha: InitialSequence,
        prefix: Vec<Point>,
    ) -> Result<CauchySequence, SpaceError> {
        if prefix.is_empty() {
            return Err(SpaceError::MalformedMatrix("empty prefix".into()));
        }
        let seq = CauchySequence {
            space,
            alpha,
            assign: Assign::EventuallyConstant { prefix },
        };
        seq.validate(seq.stabilization() + 2)?;
        Ok(seq)
    }

    /// The branch sequence of a binary-tree path: `assign(i)` is the level-`i`
    /// node along the path.
    pub fn branch(
        space: Arc<WSpace>,
        alpha: InitialSequence,
        path: TreePath,
    ) -> Result<CauchySequence, SpaceError> {
        if space.tree_data().is_none() {
            return Err(SpaceError::UnresolvedExtension(
                "branch sequences require a tree presentation".into(),
            ));
        }
        Ok(CauchySequence {
            space,
            alpha,
            assign: Assign::Branch { entries: Vec::new(), path },
        })
    }

    /// Explicit entries continued along a path.
    pub fn branch_with_entries(
        space: Arc<WSpace>,
        alpha: InitialSequence,
        entries: Vec<Point>,
        path: TreePath,
    ) -> Result<CauchySequence, SpaceError> {
        let seq = CauchySequence {
            space,
            alpha,
            assign: Assign::Branch { entries, path },
        };
        seq.validate(seq.stabilization() + 2)?;
        Ok(seq)
    }

    pub fn space(&self) -> &Arc<WSpace> {
        &self.space
    }

    pub fn alpha(&self) -> &InitialSequence {
        &self.alpha
    }

    pub fn at(&self, i: u64) -> Point {
        match &self.assign {
            Assign::EventuallyConstant { prefix } => {
                prefix[(i as usize).min(prefix.len() - 1)].clone()
            }
            Assign::Branch { entries, path } => {
                if (i as usize) < entries.len() {
                    entries[i as usize].clone()
                } else {
                    Point::Node(path.node_at(i))
                }
            }
        }
    }

    /// The sequence's eventual object: the constant tail, or the path.
    pub fn target(&self) -> Point {
        match &self.assign {
            Assign::EventuallyConstant { prefix } => prefix.last().unwrap().clone(),
            Assign::Branch { path, .. } => Point::Path(path.clone()),
        }
    }

    /// Index from which the assignment follows the target exactly.
    fn stabilization(&self) -> u64 {
        match &self.assign {
            Assign::EventuallyConstant { prefix } => prefix.len() as u64 - 1,
            Assign::Branch { entries, .. } => entries.len() as u64,
        }
    }

    fn validate(&self, upto: u64) -> Result<(), SpaceError> {
        let m = &self.space.monoid;
        for i in 0..=upto {
            for j in i..=upto {
                let d = self.space.distance(&self.at(i), &self.at(j))?;
                let rd = self.space.distance(&self.at(j), &self.at(i))?;
                let bound = m.add(&self.alpha.entry_nat(i)?, &self.alpha.entry_nat(j)?)?;
                if !m.leq(&d, &bound)? || !m.leq(&rd, &bound)? {
                    return Err(SpaceError::CauchyBound(i, j));
                }
            }
        }
        Ok(())
    }

    /// Restriction to every other index: still Cauchy over the same alpha
    /// (entries only shrink), and equivalent to the original.
    pub fn restrict_even(&self) -> CauchySequence {
        match &self.assign {
            Assign::EventuallyConstant { prefix } => {
                let thinned: Vec<Point> = (0..prefix.len())
                    .map(|i| prefix[(2 * i).min(prefix.len() - 1)].clone())
                    .collect();
                CauchySequence {
                    space: self.space.clone(),
                    alpha: self.alpha.clone(),
                    assign: Assign::EventuallyConstant { prefix: thinned },
                }
            }
            Assign::Branch { entries, path } => {
                let thinned: Vec<Point> = (0..entries.len())
                    .map(|i| self.at(2 * i as u64))
                    .collect();
                CauchySequence {
                    space: self.space.clone(),
                    alpha: self.alpha.clone(),
                    assign: Assign::Branch { entries: thinned, path: path.clone() },
                }
            }
        }
    }
}

/// Stage-refined interval around the sequence distance.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeqDistanceBound {
    pub lower: DistanceValue,
    pub upper: DistanceValue,
    pub stage: u64,
    /// True when the interval has collapsed to the exact value.
    pub collapsed: bool,
}

/// Stage-`s` bound for the sequence distance `d(p, q)`: the upper bound is
/// the best `d(p(i), q(j)) + alpha(i) + alpha(j)` over `i, j <= s`; the value
/// collapses exactly once both assignments have stabilized past the point
/// where all remaining entry distances equal the distance of the targets.
pub fn seq_distance(
    p: &CauchySequence,
    q: &CauchySequence,
    stage: u64,
) -> Result<SeqDistanceBound, SpaceError> {
    if p.space.as_ref() != q.space.as_ref() {
        return Err(SpaceError::DifferentSpaces);
    }
    if stage > STAGE_CAP {
        return Err(SpaceError::BadStage(stage));
    }
    let space = p.space.as_ref();
    let m = &space.monoid;
    let mut upper: Option<DistanceValue> = None;
    for i in 0..=stage {
        for j in 0..=stage {
            let d = space.distance(&p.at(i), &q.at(j))?;
            let b = m.add(&d, &m.add(&p.alpha.entry_nat(i)?, &q.alpha.entry_nat(j)?)?)?;
            upper = Some(match upper {
                None => b,
                Some(u) => m.meet(&u, &b)?,
            });
        }
    }
    let upper = upper.expect("stage loop is nonempty");
    let (tp, tq) = (p.target(), q.target());
    let exact = space.distance(&tp, &tq)?;
    let mut settle = p.stabilization().max(q.stabilization());
    // Branch tails only reach the target distance beyond the divergence
    // level of the two branches.
    if matches!(p.assign, Assign::Branch { .. }) || matches!(q.assign, Assign::Branch { .. }) {
        if tp != tq {
            if let Some(t) = space.tree_data() {
                let join = match (&tp, &tq) {
                    (Point::Path(a), Point::Path(b)) => a.join_with_path(b),
                    (Point::Path(a), Point::Node(b)) | (Point::Node(b), Point::Path(a)) => {
                        Some(a.join_with_node(b)?)
                    }
                    _ => t.tree.join_nodes(
                        match &tp {
                            Point::Node(n) => n,
                            _ => return Err(SpaceError::UnknownPoint(tp.to_string())),
                        },
                        match &tq {
                            Point::Node(n) => n,
                            _ => return Err(SpaceError::UnknownPoint(tq.to_string())),
                        },
                    )
                    .ok(),
                };
                if let Some(j) = join.and_then(|j| j.as_nat()) {
                    settle = settle.max(j + 1);
                }
            }
        }
    }
    if stage >= settle {
        Ok(SeqDistanceBound {
            lower: exact.clone(),
            upper: exact,
            stage,
            collapsed: true,
        })
    } else {
        Ok(SeqDistanceBound {
            lower: m.zero(),
            upper,
            stage,
            collapsed: false,
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EquivReport {
    Equiv,
    Distinct { witness: String },
    Unknown,
}

/// `p = q` iff both one-sided sequence distances vanish.
pub fn seq_equiv(
    p: &CauchySequence,
    q: &CauchySequence,
    stage: u64,
) -> Result<EquivReport, SpaceError> {
    let fwd = seq_distance(p, q, stage)?;
    let bwd = seq_distance(q, p, stage)?;
    let m = &p.space.monoid;
    if fwd.collapsed && bwd.collapsed {
        if m.is_zero(&fwd.lower) && m.is_zero(&bwd.lower) {
            Ok(EquivReport::Equiv)
        } else {
            let v = m.join(&fwd.lower, &bwd.lower)?;
            Ok(EquivReport::Distinct {
                witness: m.display_value(&v),
            })
        }
    } else if !m.is_zero(&fwd.lower) || !m.is_zero(&bwd.lower) {
        let v = m.join(&fwd.lower, &bwd.lower)?;
        Ok(EquivReport::Distinct {
            witness: m.display_value(&v),
        })
    } else {
        Ok(EquivReport::Unknown)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConvergenceReport {
    Yes,
    No { witness: String },
    Unknown,
}

/// Convergence read as equivalence with the constant sequence.
pub fn converges_to(
    p: &CauchySequence,
    x: &Point,
    stage: u64,
) -> Result<ConvergenceReport, SpaceError> {
    let xhat = CauchySequence::constant(p.space.clone(), p.alpha.clone(), x.clone());
    Ok(match seq_equiv(p, &xhat, stage)? {
        EquivReport::Equiv => ConvergenceReport::Yes,
        EquivReport::Distinct { witness } => ConvergenceReport::No { witness },
        EquivReport::Unknown => ConvergenceReport::Unknown,
    })
}

/// Cauchy completion. Non-continuous monoids and finite presentations are
/// already complete (every Cauchy sequence is eventually constant); tree
/// presentations adjoin their paths as limit points.
pub fn cauchy_completion(space: &WSpace) -> WSpace {
    let mut out = space.clone();
    if !is_continuous_at_zero(&space.monoid) || space.is_finite() {
        out.completeness = CompletenessStatus::ComputedComplete;
        return out;
    }
    if let Presentation::Tree(t) = &mut out.presentation {
        t.include_paths = true;
        out.completeness = CompletenessStatus::DerivedComplete;
    }
    out
}

pub fn origin_is_limit(p: &Point) -> bool {
    matches!(p, Point::Path(_))
}

/// A self-map on the points of a space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SelfMap {
    Identity,
    Const(Point),
    /// Explicit graph on named points.
    Table(Vec<(Point, Point)>),
    /// First child on tree nodes; the identity on paths.
    TreeLevelAdvance,
}

impl SelfMap {
    pub fn apply(&self, space: &WSpace, p: &Point) -> Result<Point, SpaceError> {
        match self {
            SelfMap::Identity => Ok(p.clone()),
            SelfMap::Const(c) => Ok(c.clone()),
            SelfMap::Table(pairs) => pairs
                .iter()
                .find(|(a, _)| a == p)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| SpaceError::UnknownPoint(p.to_string())),
            SelfMap::TreeLevelAdvance => match (space.tree_data(), p) {
                (Some(t), Point::Node(n)) => Ok(Point::Node(t.tree.first_child(n)?)),
                (Some(_), Point::Path(path)) => Ok(Point::Path(path.clone())),
                _ => Err(SpaceError::UnknownPoint(p.to_string())),
            },
        }
    }
}

/// Verifies `d(f(x), f(y)) <= d(x, y)` on the given pairs.
pub fn check_nonexpanding(
    space: &WSpace,
    map: &SelfMap,
    pairs: &[(Point, Point)],
) -> Result<SpaceReport, SpaceError> {
    let m = &space.monoid;
    for (x, y) in pairs {
        let d = space.distance(x, y)?;
        let fd = space.distance(&map.apply(space, x)?, &map.apply(space, y)?)?;
        if !m.leq(&fd, &d)? {
            return Ok(SpaceReport::Fail {
                law: SpaceLaw::NonExpansion,
                witness: vec![x.to_string(), y.to_string()],
            });
        }
    }
    Ok(SpaceReport::Pass)
}

pub fn all_pairs(points: &[Point]) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for x in points {
        for y in points {
            out.push((x.clone(), y.clone()));
        }
    }
    out
}

/// Extends a base-verified non-expanding map to limit points. The enum
/// presentation carries its own extension: the identity and constants are
/// already total, and the level-advance map fixes every path (its image
/// sequence follows the same branch). Explicit tables on spaces with limit
/// points cannot be extended without a resolution rule.
pub fn extend_nonexpanding(
    space: &WSpace,
    map: &SelfMap,
    sample_budget: usize,
) -> Result<SelfMap, SpaceError> {
    let base: Vec<Point> = space
        .points(sample_budget)
        .into_iter()
        .filter(|p| !origin_is_limit(p))
        .collect();
    match check_nonexpanding(space, map, &all_pairs(&base))? {
        SpaceReport::Pass => {}
        SpaceReport::Fail { witness, .. } => {
            return Err(SpaceError::UnresolvedExtension(format!(
                "not non-expanding at ({}, {})",
                witness[0], witness[1]
            )))
        }
    }
    match map {
        SelfMap::Table(_) if !space.is_finite() => Err(SpaceError::UnresolvedExtension(
            "no canonical limit resolution for an explicit table on a lazy space".into(),
        )),
        _ => Ok(map.clone()),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DenseSpec {
    Listed(Vec<Point>),
    /// All tree nodes of a tree presentation.
    TreeNodes,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DenseReport {
    Dense,
    NotDense { witness: Point },
    Unknown,
}

/// Finite spaces decide density exactly (distances off the diagonal are
/// bounded away from 0). Lazy spaces check sampled points to the stage bound.
pub fn check_dense(
    space: &WSpace,
    d_set: &DenseSpec,
    stage: u64,
    budget: usize,
) -> Result<DenseReport, SpaceError> {
    match (&space.presentation, d_set) {
        (Presentation::Finite { points, .. }, DenseSpec::Listed(listed)) => {
            for name in points {
                let p = Point::Sym(name.clone());
                if !listed.contains(&p) {
                    return Ok(DenseReport::NotDense { witness: p });
                }
            }
            Ok(DenseReport::Dense)
        }
        (Presentation::Tree(t), DenseSpec::TreeNodes) => {
            // Every path is stage-approximated by its own level-(stage+1)
            // node; nodes approximate themselves.
            let m = &space.monoid;
            if t.include_paths {
                if let KappaTree::Binary { .. } = t.tree {
                    let path = TreePath::leftmost();
                    let approx = Point::Node(path.node_at(stage + 1));
                    let d = space.distance(&Point::Path(path), &approx)?;
                    if !m.leq(&d, &t.alpha.entry_nat(stage)?)? {
                        return Ok(DenseReport::Unknown);
                    }
                }
            }
            Ok(DenseReport::Dense)
        }
        (Presentation::Tree(t), DenseSpec::Listed(listed)) => {
            let m = &space.monoid;
            let bound = t.alpha.entry_nat(stage)?;
            for x in space.points(budget) {
                let ok = listed.iter().any(|y| {
                    matches!(
                        (space.distance(&x, y), space.distance(y, &x)),
                        (Ok(a), Ok(b)) if m.leq(&a, &bound).unwrap_or(false)
                            && m.leq(&b, &bound).unwrap_or(false)
                    )
                });
                if !ok {
                    return Ok(DenseReport::Unknown);
                }
            }
            Ok(DenseReport::Dense)
        }
        _ => Err(SpaceError::MalformedMatrix(
            "dense-set kind does not match the presentation".into(),
        )),
    }
}

/// Parses a finite space description. Header `space <monoid-file> finite`;
/// the monoid file is loaded through the supplied resolver. Lazy spaces are
/// constructed programmatically, not from files.
pub fn parse_space_with(
    text: &str,
    load_monoid: impl Fn(&str) -> Result<String, String>,
) -> Result<WSpace, SpaceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| SpaceError::Parse { line: 1, msg: "empty file".into() })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "space" {
        return Err(SpaceError::Parse {
            line: hline,
            msg: format!("expected `space <monoid-file> finite`, got `{header}`"),
        });
    }
    if parts[2] != "finite" {
        return Err(SpaceError::Parse {
            line: hline,
            msg: "only `finite` space files are supported; lazy spaces are built in code".into(),
        });
    }
    let monoid_text = load_monoid(parts[1]).map_err(|e| SpaceError::Parse {
        line: hline,
        msg: format!("cannot load monoid file `{}`: {e}", parts[1]),
    })?;
    let monoid = crate::monoid::parse_monoid(&monoid_text)?;
    let (pline, pts_line) = lines
        .next()
        .ok_or_else(|| SpaceError::Parse { line: hline, msg: "missing points line".into() })?;
    let mut pts_iter = pts_line.split_whitespace();
    if pts_iter.next() != Some("points") {
        return Err(SpaceError::Parse {
            line: pline,
            msg: "expected `points p0 p1 ...`".into(),
        });
    }
    let points: Vec<String> = pts_iter.map(str::to_owned).collect();
    if points.is_empty() {
        return Err(SpaceError::Parse { line: pline, msg: "no points listed".into() });
    }
    let mut matrix = Vec::new();
    for _ in 0..points.len() {
        let (rline, row) = lines.next().ok_or_else(|| SpaceError::Parse {
            line: pline,
            msg: "missing matrix row".into(),
        })?;
        let vals: Result<Vec<DistanceValue>, _> = row
            .split_whitespace()
            .map(|tok| monoid.parse_value(tok))
            .collect();
        let vals = vals.map_err(|e| SpaceError::Parse {
            line: rline,
            msg: e.to_string(),
        })?;
        if vals.len() != points.len() {
            return Err(SpaceError::Parse {
                line: rline,
                msg: format!("expected {} entries", points.len()),
            });
        }
        matrix.push(vals);
    }
    if let Some((line, l)) = lines.next() {
        return Err(SpaceError::Parse { line, msg: format!("unexpected trailing line `{l}`") });
    }
    WSpace::finite(monoid, points, matrix)
}

pub fn serialize_space(space: &WSpace, monoid_file: &str) -> Option<String> {
    match &space.presentation {
        Presentation::Finite { points, matrix } => {
            let mut out = format!("space {monoid_file} finite\npoints {}\n", points.join(" "));
            for row in matrix {
                let cells: Vec<String> =
                    row.iter().map(|v| space.monoid.display_value(v)).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
            Some(out)
        }
        Presentation::Tree(_) => None,
    }
}

/// Parses a map file: lines `p -> q` over a finite space's points.
pub fn parse_map(text: &str, space: &WSpace) -> Result<SelfMap, SpaceError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (from, to) = line.split_once("->").ok_or_else(|| SpaceError::Parse {
            line: i + 1,
            msg: format!("expected `p -> q`, got `{line}`"),
        })?;
        let from = Point::Sym(from.trim().to_owned());
        let to = Point::Sym(to.trim().to_owned());
        for p in [&from, &to] {
            if !space.contains(p) {
                return Err(SpaceError::Parse {
                    line: i + 1,
                    msg: format!("unknown point `{p}`"),
                });
            }
        }
        if pairs.iter().any(|(a, _)| a == &from) {
            return Err(SpaceError::Parse {
                line: i + 1,
                msg: format!("duplicate assignment for `{from}`"),
            });
        }
        pairs.push((from, to));
    }
    if pairs.is_empty() {
        return Err(SpaceError::Parse { line: 1, msg: "empty map".into() });
    }
    Ok(SelfMap::Table(pairs))
}

pub fn serialize_map(map: &SelfMap) -> Option<String> {
    match map {
        SelfMap::Table(pairs) => {
            let mut out = String::new();
            for (a, b) in pairs {
                out.push_str(&format!("{a} -> {b}\n"));
            }
            Some(out)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{canonical_initial_sequence, chain4, parse_monoid, serialize_monoid};
    use crate::rational::ExtRational;
    use crate::treespace::{binary_tree, tree_metric};

    fn q(s: &str) -> DistanceValue {
        DistanceValue::Rational(ExtRational::parse(s).unwrap())
    }

    fn rational_alpha() -> InitialSequence {
        canonical_initial_sequence(&MonoidInstance::ExtendedRational, 4).unwrap()
    }

    fn asym_chain_space() -> WSpace {
        // d(x,y)=1, d(y,x)=2, d(x,z)=d(z,x)=2, d(y,z)=d(z,y)=1: asymmetric
        // but triangle-consistent under clamped chain addition.
        let m = chain4();
        let v = |i: usize| DistanceValue::Index(i);
        WSpace::finite(
            m,
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                vec![v(0), v(1), v(2)],
                vec![v(2), v(0), v(1)],
                vec![v(2), v(1), v(0)],
            ],
        )
        .unwrap()
    }

    // Valid asymmetric quasi-metric over ExtendedRational, so sequences can
    // carry the canonical geometric alpha.
    fn rational_asym_space() -> WSpace {
        WSpace::finite(
            MonoidInstance::ExtendedRational,
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                vec![q("0"), q("1"), q("3")],
                vec![q("2"), q("0"), q("1")],
                vec![q("3"), q("1"), q("0")],
            ],
        )
        .unwrap()
    }

    fn rational_line_space() -> WSpace {
        WSpace::finite(
            MonoidInstance::ExtendedRational,
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                vec![q("0"), q("1"), q("top")],
                vec![q("1"), q("0"), q("1")],
                vec![q("top"), q("1"), q("0")],
            ],
        )
        .unwrap()
    }

    #[test]
    fn asymmetric_space_passes() {
        assert!(check_space_axioms(&asym_chain_space()).unwrap().passed());
    }

    #[test]
    fn singleton_passes() {
        let s = WSpace::finite(
            MonoidInstance::ExtendedRational,
            vec!["x".into()],
            vec![vec![q("0")]],
        )
        .unwrap();
        assert!(check_space_axioms(&s).unwrap().passed());
    }

    #[test]
    fn triangle_violation_witness() {
        let s = rational_line_space();
        assert_eq!(
            check_space_axioms(&s).unwrap(),
            SpaceReport::Fail {
                law: SpaceLaw::Triangle,
                witness: vec!["x".into(), "y".into(), "z".into()],
            }
        );
    }

    #[test]
    fn constant_sequences_collapse_to_point_distance() {
        let s = Arc::new(rational_asym_space());
        let a = rational_alpha();
        let xs = CauchySequence::constant(s.clone(), a.clone(), Point::Sym("x".into()));
        let ys = CauchySequence::constant(s.clone(), a, Point::Sym("y".into()));
        let b = seq_distance(&xs, &ys, 0).unwrap();
        assert!(b.collapsed);
        assert_eq!(b.lower, q("1"));
        let b = seq_distance(&xs, &xs, 0).unwrap();
        assert!(b.collapsed && s.monoid.is_zero(&b.lower));
    }

    #[test]
    fn branch_sequences_distinguish_at_divergence() {
        let alpha = rational_alpha();
        let space = Arc::new(tree_metric(&binary_tree(), &alpha, true).unwrap());
        let left = CauchySequence::branch(space.clone(), alpha.clone(), TreePath::leftmost())
            .unwrap();
        let other = CauchySequence::branch(
            space.clone(),
            alpha.clone(),
            TreePath::from_stem(vec![false, false, false, false, true]),
        )
        .unwrap();
        let b = seq_distance(&left, &other, 6).unwrap();
        assert!(b.collapsed);
        assert_eq!(b.lower, q("1/256"));
        // Divergence at level 3 in the canonical example.
        let diverge3 = CauchySequence::branch(
            space.clone(),
            alpha.clone(),
            TreePath::from_stem(vec![true]),
        )
        .unwrap();
        let c = seq_distance(&left, &diverge3, 6).unwrap();
        assert_eq!(c.lower, q("1"));
        match seq_equiv(&left, &other, 6).unwrap() {
            EquivReport::Distinct { witness } => assert_eq!(witness, "1/256"),
            r => panic!("expected Distinct, got {r:?}"),
        }
    }

    #[test]
    fn divergence_at_level_three_gives_one_sixty_fourth() {
        let alpha = rational_alpha();
        let space = Arc::new(tree_metric(&binary_tree(), &alpha, true).unwrap());
        let p = CauchySequence::branch(space.clone(), alpha.clone(), TreePath::leftmost()).unwrap();
        let q_seq = CauchySequence::branch(
            space.clone(),
            alpha.clone(),
            TreePath::from_stem(vec![false, false, false, true]),
        )
        .unwrap();
        let b = seq_distance(&p, &q_seq, 8).unwrap();
        assert!(b.collapsed);
        assert_eq!(b.lower, q("1/64"));
    }

    #[test]
    fn restriction_is_equivalent() {
        let s = Arc::new(rational_asym_space());
        let a = rational_alpha();
        let p = CauchySequence::eventually_constant(
            s.clone(),
            a,
            vec![Point::Sym("x".into()), Point::Sym("x".into()), Point::Sym("x".into())],
        )
        .unwrap();
        let r = p.restrict_even();
        assert_eq!(seq_equiv(&p, &r, 4).unwrap(), EquivReport::Equiv);
    }

    #[test]
    fn convergence_on_trees() {
        let alpha = rational_alpha();
        let space = Arc::new(tree_metric(&binary_tree(), &alpha, true).unwrap());
        let p = CauchySequence::branch(space.clone(), alpha.clone(), TreePath::leftmost()).unwrap();
        assert_eq!(
            converges_to(&p, &Point::Path(TreePath::leftmost()), 4).unwrap(),
            ConvergenceReport::Yes
        );
        let off = Point::Path(TreePath::from_stem(vec![true]));
        assert!(matches!(
            converges_to(&p, &off, 4).unwrap(),
            ConvergenceReport::No { .. }
        ));
    }

    #[test]
    fn completion_flags() {
        let fin = asym_chain_space();
        let done = cauchy_completion(&fin);
        assert_eq!(done.completeness, CompletenessStatus::ComputedComplete);
        assert_eq!(done.presentation, fin.presentation);

        let alpha = rational_alpha();
        let tree = tree_metric(&binary_tree(), &alpha, false).unwrap();
        let completed = cauchy_completion(&tree);
        assert_eq!(completed.completeness, CompletenessStatus::DerivedComplete);
        assert!(completed.tree_data().unwrap().include_paths);
        // Idempotent.
        assert_eq!(cauchy_completion(&completed), completed);
    }

    #[test]
    fn level_advance_fixes_paths() {
        let alpha = rational_alpha();
        let space = Arc::new(tree_metric(&binary_tree(), &alpha, true).unwrap());
        let f = extend_nonexpanding(&space, &SelfMap::TreeLevelAdvance, 12).unwrap();
        let p = Point::Path(TreePath::leftmost());
        assert_eq!(f.apply(&space, &p).unwrap(), p);
        assert_eq!(
            f.apply(&space, &Point::Node(TreeNode::Bits(vec![false, true]))).unwrap(),
            Point::Node(TreeNode::Bits(vec![false, true, false]))
        );
    }

    #[test]
    fn dense_checks() {
        let s = asym_chain_space();
        let all: Vec<Point> = s.points(10);
        assert_eq!(
            check_dense(&s, &DenseSpec::Listed(all.clone()), 4, 10).unwrap(),
            DenseReport::Dense
        );
        let partial = DenseSpec::Listed(all[..2].to_vec());
        assert_eq!(
            check_dense(&s, &partial, 4, 10).unwrap(),
            DenseReport::NotDense { witness: Point::Sym("z".into()) }
        );
        let alpha = rational_alpha();
        let tree = tree_metric(&binary_tree(), &alpha, true).unwrap();
        assert_eq!(
            check_dense(&tree, &DenseSpec::TreeNodes, 6, 16).unwrap(),
            DenseReport::Dense
        );
    }

    #[test]
    fn space_file_roundtrip() {
        let s = asym_chain_space();
        let mon_text = serialize_monoid(&s.monoid);
        let text = serialize_space(&s, "chain4.mon").unwrap();
        let parsed = parse_space_with(&text, |name| {
            assert_eq!(name, "chain4.mon");
            Ok(mon_text.clone())
        })
        .unwrap();
        assert_eq!(parsed.presentation, s.presentation);
        assert_eq!(parsed.monoid, s.monoid);
        // Reparse of the monoid text is stable too.
        assert_eq!(parse_monoid(&mon_text).unwrap(), s.monoid);
    }

    #[test]
    fn map_file_roundtrip_and_errors() {
        let s = asym_chain_space();
        let map = parse_map("x -> y\ny -> x\nz -> z\n", &s).unwrap();
        let text = serialize_map(&map).unwrap();
        assert_eq!(parse_map(&text, &s).unwrap(), map);
        assert!(matches!(
            parse_map("x -> w\n", &s),
            Err(SpaceError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_map("x => y\n", &s),
            Err(SpaceError::Parse { .. })
        ));
    }

    #[test]
    fn cauchy_bound_enforced() {
        let s = Arc::new(rational_line_space());
        let a = rational_alpha();
        // x and z are at distance top: not a Cauchy prefix.
        let bad = CauchySequence::eventually_constant(
            s,
            a,
            vec![Point::Sym("x".into()), Point::Sym("z".into())],
        );
        assert!(matches!(bad, Err(SpaceError::CauchyBound(_, _))));
    }
}
