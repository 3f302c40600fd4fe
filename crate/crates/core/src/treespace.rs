//! Level-graded trees: the binary omega-tree, the ledger-carrying pruned tree
//! S_kappa with no paths at uncountable heights, joins, restrictions, path
//! extraction along countable cofinal sequences, and the induced ultrametric
//! space on nodes and paths.

use std::fmt;

use thiserror::Error;

use crate::monoid::InitialSequence;
use crate::ordinal::OrdinalNotation;
use crate::wspace::{CompletenessStatus, Point, Presentation, TreeSpaceData, WSpace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("nodes belong to different trees")]
    DifferentTrees,
    #[error("invalid node: {0}")]
    InvalidNode(String),
    #[error("no extension exists above node {0}")]
    Stuck(String),
    #[error("proposed sequence is not cofinal in the height: {0}")]
    NotCofinal(String),
    #[error("incoherent path prefix: {0}")]
    IncoherentPrefix(String),
    #[error("initial sequence index bound does not match the tree height")]
    HeightMismatch,
    #[error("level {0} out of range for this tree")]
    BadLevel(String),
}

/// A lazily presented level-graded tree.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum KappaTree {
    /// The full binary tree of height omega; `blocked` lists nodes turned
    /// into leaves (used to exercise pruning failures).
    Binary { blocked: Vec<Vec<bool>> },
    /// The ledger tree: nodes are pairs `(a, g)` with `g` a finite strictly
    /// increasing ordinal ledger starting at 0 and `g(n) < a <= g(n+1)`.
    SKappa { height: OrdinalNotation },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TreeNode {
    Bits(Vec<bool>),
    S {
        level: OrdinalNotation,
        ledger: Vec<OrdinalNotation>,
    },
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeNode::Bits(b) => {
                if b.is_empty() {
                    write!(f, "root")
                } else {
                    for &bit in b {
                        write!(f, "{}", if bit { '1' } else { '0' })?;
                    }
                    Ok(())
                }
            }
            TreeNode::S { level, ledger } => {
                let entries: Vec<String> = ledger.iter().map(|o| o.to_string()).collect();
                write!(f, "({}; [{}])", level, entries.join(","))
            }
        }
    }
}

pub fn binary_tree() -> KappaTree {
    KappaTree::Binary { blocked: Vec::new() }
}

/// The S_kappa construction for the given height. Heights with countable
/// cofinality are allowed so the machinery is testable where paths do exist.
pub fn build_s_kappa(height: OrdinalNotation) -> KappaTree {
    KappaTree::SKappa { height }
}

impl KappaTree {
    pub fn height(&self) -> OrdinalNotation {
        match self {
            KappaTree::Binary { .. } => OrdinalNotation::omega(),
            KappaTree::SKappa { height } => height.clone(),
        }
    }

    pub fn root(&self) -> TreeNode {
        match self {
            KappaTree::Binary { .. } => TreeNode::Bits(Vec::new()),
            KappaTree::SKappa { .. } => TreeNode::S {
                level: OrdinalNotation::zero(),
                ledger: vec![OrdinalNotation::zero()],
            },
        }
    }

    pub fn validate_node(&self, node: &TreeNode) -> Result<(), TreeError> {
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(_)) => Ok(()),
            (KappaTree::SKappa { height }, TreeNode::S { level, ledger }) => {
                if node == &self.root() {
                    return Ok(());
                }
                let bad = || TreeError::InvalidNode(node.to_string());
                if ledger.len() < 2 || !ledger[0].is_zero() {
                    return Err(bad());
                }
                for w in ledger.windows(2) {
                    if w[0] >= w[1] {
                        return Err(bad());
                    }
                }
                if ledger.iter().any(|e| e >= height) || level >= height {
                    return Err(bad());
                }
                let n = ledger.len() - 2;
                if !(&ledger[n] < level && level <= &ledger[n + 1]) {
                    return Err(bad());
                }
                Ok(())
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    pub fn level(&self, node: &TreeNode) -> Result<OrdinalNotation, TreeError> {
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(b)) => {
                Ok(OrdinalNotation::from_nat(b.len() as u64))
            }
            (KappaTree::SKappa { .. }, TreeNode::S { level, .. }) => Ok(level.clone()),
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// The unique ancestor at level `i` (`i <= level(node)`).
    pub fn restrict(&self, node: &TreeNode, i: &OrdinalNotation) -> Result<TreeNode, TreeError> {
        if i > &self.level(node)? {
            return Err(TreeError::BadLevel(i.to_string()));
        }
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(b)) => {
                let k = i.as_nat().ok_or_else(|| TreeError::BadLevel(i.to_string()))? as usize;
                Ok(TreeNode::Bits(b[..k].to_vec()))
            }
            (KappaTree::SKappa { .. }, TreeNode::S { ledger, level }) => {
                if i == level {
                    return Ok(node.clone());
                }
                if i.is_zero() {
                    return Ok(self.root());
                }
                for m in 0..ledger.len().saturating_sub(1) {
                    if &ledger[m] < i && i <= &ledger[m + 1] {
                        return Ok(TreeNode::S {
                            level: i.clone(),
                            ledger: ledger[..m + 2].to_vec(),
                        });
                    }
                }
                Err(TreeError::BadLevel(i.to_string()))
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    pub fn node_le(&self, a: &TreeNode, b: &TreeNode) -> Result<bool, TreeError> {
        match (self, a, b) {
            (KappaTree::Binary { .. }, TreeNode::Bits(x), TreeNode::Bits(y)) => {
                Ok(y.len() >= x.len() && &y[..x.len()] == x.as_slice())
            }
            (
                KappaTree::SKappa { .. },
                TreeNode::S { level: la, ledger: ga },
                TreeNode::S { level: lb, ledger: gb },
            ) => Ok(gb.len() >= ga.len() && gb[..ga.len()] == ga[..] && la <= lb),
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// Supremum of levels of common lower bounds; `join(a, a)` is the height.
    pub fn join_nodes(&self, a: &TreeNode, b: &TreeNode) -> Result<OrdinalNotation, TreeError> {
        if a == b {
            return Ok(self.height());
        }
        match (self, a, b) {
            (KappaTree::Binary { .. }, TreeNode::Bits(x), TreeNode::Bits(y)) => {
                let k = x.iter().zip(y.iter()).take_while(|(p, q)| p == q).count();
                Ok(OrdinalNotation::from_nat(k as u64))
            }
            (
                KappaTree::SKappa { .. },
                TreeNode::S { level: la, ledger: ga },
                TreeNode::S { level: lb, ledger: gb },
            ) => {
                if self.node_le(a, b)? {
                    return Ok(la.clone());
                }
                if self.node_le(b, a)? {
                    return Ok(lb.clone());
                }
                let m = ga
                    .iter()
                    .zip(gb.iter())
                    .take_while(|(p, q)| p == q)
                    .count();
                // Ledgers of valid incomparable nodes always share at least
                // the leading 0 and the join is the last common entry capped
                // by both levels.
                let common = &ga[..m];
                let cap = common
                    .last()
                    .cloned()
                    .unwrap_or_else(OrdinalNotation::zero);
                let cap = if &cap <= la { cap } else { la.clone() };
                let cap = if &cap <= lb { cap } else { lb.clone() };
                Ok(cap)
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    fn is_blocked(&self, node: &TreeNode) -> bool {
        match (self, node) {
            (KappaTree::Binary { blocked }, TreeNode::Bits(b)) => blocked.contains(b),
            _ => false,
        }
    }

    /// First (enumeration-minimal) extension of `node` at `target` level:
    /// all-zero continuation for the binary tree, minimal ledger append for
    /// S_kappa.
    pub fn extend_to_first(
        &self,
        node: &TreeNode,
        target: &OrdinalNotation,
    ) -> Result<TreeNode, TreeError> {
        let level = self.level(node)?;
        if target < &level {
            return Err(TreeError::BadLevel(target.to_string()));
        }
        if target >= &self.height() {
            return Err(TreeError::BadLevel(target.to_string()));
        }
        if target == &level {
            return Ok(node.clone());
        }
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(b)) => {
                let k = target
                    .as_nat()
                    .ok_or_else(|| TreeError::BadLevel(target.to_string()))?
                    as usize;
                let mut bits = b.clone();
                while bits.len() < k {
                    if self.is_blocked(&TreeNode::Bits(bits.clone())) {
                        return Err(TreeError::Stuck(TreeNode::Bits(bits).to_string()));
                    }
                    bits.push(false);
                }
                Ok(TreeNode::Bits(bits))
            }
            (KappaTree::SKappa { .. }, TreeNode::S { ledger, .. }) => {
                let last = ledger.last().expect("nonempty ledger");
                let out = if target <= last {
                    TreeNode::S {
                        level: target.clone(),
                        ledger: ledger.clone(),
                    }
                } else {
                    // Smallest admissible new ledger entry is the target itself.
                    let mut g = ledger.clone();
                    g.push(target.clone());
                    TreeNode::S {
                        level: target.clone(),
                        ledger: g,
                    }
                };
                self.validate_node(&out)?;
                Ok(out)
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// Extensions of `node` at `target` level in enumeration order, up to
    /// `limit` candidates.
    pub fn extend_candidates(
        &self,
        node: &TreeNode,
        target: &OrdinalNotation,
        limit: usize,
    ) -> Result<Vec<TreeNode>, TreeError> {
        let level = self.level(node)?;
        if target < &level || target >= &self.height() {
            return Err(TreeError::BadLevel(target.to_string()));
        }
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(b)) => {
                let k = target
                    .as_nat()
                    .ok_or_else(|| TreeError::BadLevel(target.to_string()))?
                    as usize;
                let extra = k - b.len();
                let mut out = Vec::new();
                'outer: for suffix in 0..(1u64 << extra.min(20)) {
                    if out.len() >= limit {
                        break;
                    }
                    let mut bits = b.clone();
                    for i in (0..extra).rev() {
                        bits.push(suffix >> i & 1 == 1);
                        if self.is_blocked(&TreeNode::Bits(bits[..bits.len() - 1].to_vec()))
                            && bits.len() - 1 > b.len()
                        {
                            continue 'outer;
                        }
                    }
                    if extra > 0 && self.is_blocked(&TreeNode::Bits(b.clone())) {
                        break;
                    }
                    out.push(TreeNode::Bits(bits));
                }
                Ok(out)
            }
            (KappaTree::SKappa { .. }, TreeNode::S { ledger, .. }) => {
                let last = ledger.last().expect("nonempty ledger");
                if target <= last {
                    return Ok(vec![TreeNode::S {
                        level: target.clone(),
                        ledger: ledger.clone(),
                    }]);
                }
                // Appended entry ranges over target, target+1, ... in order.
                let mut out = Vec::new();
                let mut entry = target.clone();
                for _ in 0..limit {
                    let mut g = ledger.clone();
                    g.push(entry.clone());
                    let cand = TreeNode::S {
                        level: target.clone(),
                        ledger: g,
                    };
                    if self.validate_node(&cand).is_ok() {
                        out.push(cand);
                    }
                    entry = match entry.succ() {
                        Ok(s) if s < self.height() => s,
                        _ => break,
                    };
                }
                Ok(out)
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// The canonical level-advancing first child: `f(t) > t` everywhere on a
    /// pruned tree.
    pub fn first_child(&self, node: &TreeNode) -> Result<TreeNode, TreeError> {
        match (self, node) {
            (KappaTree::Binary { .. }, TreeNode::Bits(b)) => {
                if self.is_blocked(node) {
                    return Err(TreeError::Stuck(node.to_string()));
                }
                let mut bits = b.clone();
                bits.push(false);
                Ok(TreeNode::Bits(bits))
            }
            (KappaTree::SKappa { .. }, TreeNode::S { level, ledger }) => {
                let next = level
                    .succ()
                    .map_err(|_| TreeError::BadLevel(level.to_string()))?;
                let last = ledger.last().expect("nonempty ledger");
                let g = if &next <= last {
                    ledger.clone()
                } else {
                    let mut g = ledger.clone();
                    g.push(next.clone());
                    g
                };
                let out = TreeNode::S { level: next, ledger: g };
                self.validate_node(&out)?;
                Ok(out)
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// Deterministic enumeration of nodes: shortlex for the binary tree;
    /// for S_kappa a diagonal sweep over growing caps on the level and the
    /// ledger entries (restricted to finite notations, which is all a width
    /// budget can ever exhaust).
    pub fn enumerate_nodes(&self, count: usize) -> Vec<TreeNode> {
        match self {
            KappaTree::Binary { .. } => {
                let mut out = Vec::with_capacity(count);
                let mut frontier = vec![Vec::new()];
                while out.len() < count {
                    let mut next = Vec::new();
                    for bits in frontier {
                        if out.len() >= count {
                            break;
                        }
                        out.push(TreeNode::Bits(bits.clone()));
                        if !self.is_blocked(&TreeNode::Bits(bits.clone())) {
                            let mut l = bits.clone();
                            l.push(false);
                            let mut r = bits;
                            r.push(true);
                            next.push(l);
                            next.push(r);
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                out
            }
            KappaTree::SKappa { .. } => {
                let mut out = vec![self.root()];
                let mut cap = 1u64;
                while out.len() < count && cap < 64 {
                    let mut batch = Vec::new();
                    for ledger in increasing_ledgers(cap) {
                        let n = ledger.len() - 2;
                        let (lo, hi) = (ledger[n], ledger[n + 1]);
                        for a in (lo + 1)..=hi {
                            let node = TreeNode::S {
                                level: OrdinalNotation::from_nat(a),
                                ledger: ledger.iter().map(|&e| OrdinalNotation::from_nat(e)).collect(),
                            };
                            if !out.contains(&node) && !batch.contains(&node) {
                                batch.push(node);
                            }
                        }
                    }
                    batch.sort_by_key(|n| match n {
                        TreeNode::S { level, ledger } => (level.clone(), ledger.clone()),
                        _ => unreachable!(),
                    });
                    for node in batch {
                        if out.len() >= count {
                            break;
                        }
                        out.push(node);
                    }
                    cap += 1;
                }
                out.truncate(count);
                out
            }
        }
    }
}

/// All strictly increasing ledgers `0 = g(0) < ... < g(n+1) <= cap` with at
/// least two entries.
fn increasing_ledgers(cap: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    // Subsets of 1..=cap as the tail of the ledger, by bitmask, smallest sets
    // first for a stable order.
    let m = cap.min(16) as u32;
    let mut masks: Vec<u32> = (1..(1u32 << m)).collect();
    masks.sort_by_key(|x| (x.count_ones(), *x));
    for mask in masks {
        let mut ledger = vec![0u64];
        for bit in 0..m {
            if mask >> bit & 1 == 1 {
                ledger.push(bit as u64 + 1);
            }
        }
        out.push(ledger);
    }
    out
}

/// Outcome of a pruning spot check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PrunedReport {
    Pass,
    Fail { node: TreeNode, level: OrdinalNotation },
}

/// For each sampled `(node, level)` with `level(node) < level`, looks for an
/// extension of the node at that level.
pub fn pruned_check(
    tree: &KappaTree,
    samples: &[(TreeNode, OrdinalNotation)],
) -> Result<PrunedReport, TreeError> {
    for (node, target) in samples {
        tree.validate_node(node)?;
        if target >= &tree.height() || target <= &tree.level(node)? {
            continue;
        }
        if tree.extend_to_first(node, target).is_err() {
            return Ok(PrunedReport::Fail {
                node: node.clone(),
                level: target.clone(),
            });
        }
    }
    Ok(PrunedReport::Pass)
}

/// A path through the binary omega-tree that is eventually the all-zero
/// (first-child) continuation of a finite stem. The stem is canonical: no
/// trailing zeros, so the empty stem is the leftmost path.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TreePath {
    stem: Vec<bool>,
}

impl TreePath {
    pub fn from_stem(mut stem: Vec<bool>) -> TreePath {
        while stem.last() == Some(&false) {
            stem.pop();
        }
        TreePath { stem }
    }

    pub fn leftmost() -> TreePath {
        TreePath { stem: Vec::new() }
    }

    pub fn node_at(&self, level: u64) -> TreeNode {
        let mut bits: Vec<bool> = self.stem.iter().copied().take(level as usize).collect();
        while (bits.len() as u64) < level {
            bits.push(false);
        }
        TreeNode::Bits(bits)
    }

    /// Level of divergence from a node's branch.
    pub fn join_with_node(&self, node: &TreeNode) -> Result<OrdinalNotation, TreeError> {
        match node {
            TreeNode::Bits(b) => {
                let mine = self.node_at(b.len() as u64);
                let k = match (&mine, node) {
                    (TreeNode::Bits(x), TreeNode::Bits(y)) => {
                        x.iter().zip(y.iter()).take_while(|(p, q)| p == q).count()
                    }
                    _ => unreachable!(),
                };
                Ok(OrdinalNotation::from_nat(k as u64))
            }
            _ => Err(TreeError::DifferentTrees),
        }
    }

    /// Level of divergence from another path; `None` when the paths agree.
    pub fn join_with_path(&self, other: &TreePath) -> Option<OrdinalNotation> {
        if self == other {
            return None;
        }
        let n = self.stem.len().max(other.stem.len()) as u64;
        for k in 0..=n {
            if self.node_at(k) != other.node_at(k) {
                return Some(OrdinalNotation::from_nat(k - 1));
            }
        }
        unreachable!("distinct canonical stems diverge within their length")
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stem.is_empty() {
            write!(f, "path(0^w)")
        } else {
            write!(f, "path({}0^w)", TreeNode::Bits(self.stem.clone()))
        }
    }
}

/// A strictly increasing omega-sequence of levels with a declared supremum.
#[derive(Clone, Debug)]
pub struct CofinalSequence {
    pub kind: CofinalKind,
    pub declared_sup: OrdinalNotation,
}

#[derive(Clone, Debug)]
pub enum CofinalKind {
    /// `gamma(n) = n`, cofinal in omega.
    Naturals,
    /// `gamma(n) = w * n`, cofinal in omega^2.
    OmegaTimes,
    /// Explicit finite prefix of a proposed sequence.
    Explicit(Vec<OrdinalNotation>),
}

impl CofinalSequence {
    pub fn naturals() -> Self {
        CofinalSequence {
            kind: CofinalKind::Naturals,
            declared_sup: OrdinalNotation::omega(),
        }
    }

    pub fn omega_times() -> Self {
        CofinalSequence {
            kind: CofinalKind::OmegaTimes,
            declared_sup: OrdinalNotation::omega_squared(),
        }
    }

    pub fn gamma(&self, n: u64) -> Option<OrdinalNotation> {
        match &self.kind {
            CofinalKind::Naturals => Some(OrdinalNotation::from_nat(n)),
            CofinalKind::OmegaTimes => Some(OrdinalNotation::omega_times(n)),
            CofinalKind::Explicit(v) => v.get(n as usize).cloned(),
        }
    }
}

/// A coherent bounded approximation to a path: milestone nodes at the levels
/// of a cofinal sequence, restricted down to any intermediate level.
#[derive(Clone, Debug)]
pub struct PathPrefix {
    pub tree: KappaTree,
    pub gammas: Vec<OrdinalNotation>,
    pub milestones: Vec<TreeNode>,
}

impl PathPrefix {
    /// `y(level)`: the milestone restriction at the requested level, defined
    /// up to the last milestone's level.
    pub fn node_at(&self, level: &OrdinalNotation) -> Result<TreeNode, TreeError> {
        for (g, m) in self.gammas.iter().zip(&self.milestones) {
            if level <= g {
                return self.tree.restrict(m, level);
            }
        }
        Err(TreeError::BadLevel(level.to_string()))
    }

    pub fn covered_level(&self) -> Option<&OrdinalNotation> {
        self.gammas.last()
    }

    /// Checks level correctness, strict increase, and restrict-coherence of
    /// the milestones.
    pub fn check_coherent(&self) -> Result<(), TreeError> {
        for (g, m) in self.gammas.iter().zip(&self.milestones) {
            if &self.tree.level(m)? != g {
                return Err(TreeError::IncoherentPrefix(format!(
                    "milestone {m} is not at level {g}"
                )));
            }
        }
        for w in self.milestones.windows(2) {
            if !self.tree.node_le(&w[0], &w[1])? {
                return Err(TreeError::IncoherentPrefix(format!(
                    "{} is not below {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Path extraction along a countable cofinal sequence, following the minimal
/// extension at each milestone. Refuses symbolic-uncountable heights: no
/// countable sequence is cofinal there.
pub fn find_path_cf_omega(
    tree: &KappaTree,
    cofinal: &CofinalSequence,
    steps: u64,
) -> Result<PathPrefix, TreeError> {
    let height = tree.height();
    if height == OrdinalNotation::Omega {
        return Err(TreeError::NotCofinal(
            "height omega-1 exceeds every countable sequence of CNF levels".into(),
        ));
    }
    if cofinal.declared_sup != height {
        return Err(TreeError::NotCofinal(format!(
            "declared supremum {} differs from height {}",
            cofinal.declared_sup, height
        )));
    }
    match &cofinal.kind {
        CofinalKind::Naturals => {
            if height != OrdinalNotation::omega() {
                return Err(TreeError::NotCofinal("naturals are cofinal only in w".into()));
            }
        }
        CofinalKind::OmegaTimes => {
            if height != OrdinalNotation::omega_squared() {
                return Err(TreeError::NotCofinal("w*n is cofinal only in w^2".into()));
            }
        }
        CofinalKind::Explicit(v) => {
            for w in v.windows(2) {
                if w[0] >= w[1] {
                    return Err(TreeError::NotCofinal(format!(
                        "entries {} >= {} are not strictly increasing",
                        w[0], w[1]
                    )));
                }
            }
            if v.iter().any(|g| g >= &height) {
                return Err(TreeError::NotCofinal("entry at or above the height".into()));
            }
        }
    }
    let mut gammas = Vec::new();
    let mut milestones = Vec::new();
    let mut current = tree.root();
    for n in 0..steps {
        let g = match cofinal.gamma(n) {
            Some(g) => g,
            None => break,
        };
        if let Some(prev) = gammas.last() {
            if &g <= prev {
                return Err(TreeError::NotCofinal(format!(
                    "gamma({n}) = {g} does not increase"
                )));
            }
        }
        current = tree.extend_to_first(&current, &g)?;
        gammas.push(g);
        milestones.push(current.clone());
    }
    let prefix = PathPrefix {
        tree: tree.clone(),
        gammas,
        milestones,
    };
    prefix.check_coherent()?;
    Ok(prefix)
}

/// The proof-side extraction: the union of the g-ledgers along a coherent
/// prefix through S_kappa, always strictly increasing. Along any total path
/// this would be an omega-sequence cofinal in the height, which is the
/// obstruction at uncountable cofinality.
pub fn extract_cofinal(prefix: &PathPrefix) -> Result<Vec<OrdinalNotation>, TreeError> {
    if !matches!(prefix.tree, KappaTree::SKappa { .. }) {
        return Err(TreeError::DifferentTrees);
    }
    prefix.check_coherent()?;
    let mut q: Vec<OrdinalNotation> = Vec::new();
    for m in &prefix.milestones {
        if let TreeNode::S { ledger, .. } = m {
            for e in ledger {
                if !q.contains(e) {
                    q.push(e.clone());
                }
            }
        }
    }
    q.sort();
    for w in q.windows(2) {
        if w[0] >= w[1] {
            return Err(TreeError::IncoherentPrefix("ledger not increasing".into()));
        }
    }
    Ok(q)
}

/// The tree metric space `d(x, y) = alpha(join(x, y))` on nodes (and paths,
/// when included) of the tree. The diagonal is 0 by definition; `alpha` is
/// never evaluated at the height.
pub fn tree_metric(
    tree: &KappaTree,
    alpha: &InitialSequence,
    include_paths: bool,
) -> Result<WSpace, TreeError> {
    if alpha.index_bound() != &tree.height() {
        return Err(TreeError::HeightMismatch);
    }
    if alpha.niceness_factor() < 2 {
        return Err(TreeError::HeightMismatch);
    }
    Ok(WSpace {
        monoid: alpha.instance().clone(),
        presentation: Presentation::Tree(TreeSpaceData {
            tree: tree.clone(),
            alpha: alpha.clone(),
            include_paths,
        }),
        completeness: if include_paths {
            CompletenessStatus::DerivedComplete
        } else {
            CompletenessStatus::Unknown
        },
    })
}

/// The proof's limit formula for a branch-following Cauchy assignment:
/// `x(j) = p(j+2) restricted to j`. For binary branch sequences this resolves
/// to the branch's path point.
pub fn limit_by_formula(
    tree: &KappaTree,
    assign_at: impl Fn(u64) -> TreeNode,
    depth: u64,
) -> Result<Point, TreeError> {
    let mut deepest: Option<TreeNode> = None;
    for j in 0..depth {
        let node = assign_at(j + 2);
        let level = tree.level(&node)?;
        let j_ord = OrdinalNotation::from_nat(j);
        let cut = if level <= j_ord { node } else { tree.restrict(&node, &j_ord)? };
        if let Some(prev) = &deepest {
            if !tree.node_le(prev, &cut)? {
                return Err(TreeError::IncoherentPrefix(format!(
                    "{prev} not below {cut} in limit formula"
                )));
            }
        }
        deepest = Some(cut);
    }
    match deepest {
        Some(TreeNode::Bits(bits)) => Ok(Point::Path(TreePath::from_stem(bits))),
        Some(node) => Ok(Point::Node(node)),
        None => Err(TreeError::IncoherentPrefix("empty limit formula sample".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: &str) -> OrdinalNotation {
        OrdinalNotation::parse(s).unwrap()
    }

    fn bits(s: &str) -> TreeNode {
        TreeNode::Bits(s.chars().map(|c| c == '1').collect())
    }

    fn snode(level: &str, ledger: &[&str]) -> TreeNode {
        TreeNode::S {
            level: ord(level),
            ledger: ledger.iter().map(|s| ord(s)).collect(),
        }
    }

    #[test]
    fn binary_join_is_common_prefix() {
        let t = binary_tree();
        assert_eq!(t.join_nodes(&bits("010"), &bits("011")).unwrap(), ord("2"));
        assert_eq!(t.join_nodes(&bits("010"), &bits("010")).unwrap(), ord("w"));
        assert_eq!(t.join_nodes(&t.root(), &bits("1101")).unwrap(), ord("0"));
    }

    #[test]
    fn s_kappa_node_validity() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        assert!(t.validate_node(&t.root()).is_ok());
        assert!(t.validate_node(&snode("3", &["0", "2", "5"])).is_ok());
        assert!(t.validate_node(&snode("6", &["0", "2", "5"])).is_err());
        assert!(t.validate_node(&snode("2", &["0", "5", "3"])).is_err());
    }

    #[test]
    fn s_kappa_restrict_walks_the_ledger() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        let n = snode("7", &["0", "2", "5", "9"]);
        t.validate_node(&n).unwrap();
        assert_eq!(t.restrict(&n, &ord("1")).unwrap(), snode("1", &["0", "2"]));
        assert_eq!(t.restrict(&n, &ord("4")).unwrap(), snode("4", &["0", "2", "5"]));
        assert_eq!(t.restrict(&n, &ord("0")).unwrap(), t.root());
        assert_eq!(t.restrict(&n, &ord("7")).unwrap(), n);
        // Restrictions are nested.
        let r3 = t.restrict(&n, &ord("3")).unwrap();
        let r5 = t.restrict(&n, &ord("5")).unwrap();
        assert!(t.node_le(&r3, &r5).unwrap());
    }

    #[test]
    fn s_kappa_join() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        let a = snode("3", &["0", "2", "5"]);
        let b = snode("4", &["0", "2", "7"]);
        // Ledgers diverge after [0, 2]: last common entry is 2.
        assert_eq!(t.join_nodes(&a, &b).unwrap(), ord("2"));
        let c = snode("4", &["0", "2", "5"]);
        assert_eq!(t.join_nodes(&a, &c).unwrap(), ord("3"));
        assert_eq!(t.join_nodes(&a, &a).unwrap(), OrdinalNotation::Omega);
    }

    #[test]
    fn first_child_advances_level() {
        let t = binary_tree();
        assert_eq!(t.first_child(&bits("01")).unwrap(), bits("010"));
        let s = build_s_kappa(ord("w^2"));
        let n = snode("2", &["0", "2"]);
        let c = s.first_child(&n).unwrap();
        assert_eq!(c, snode("3", &["0", "2", "3"]));
        assert!(s.node_le(&n, &c).unwrap());
    }

    #[test]
    fn pruned_check_passes_full_binary_and_fails_blocked() {
        let t = binary_tree();
        let samples: Vec<(TreeNode, OrdinalNotation)> =
            vec![(t.root(), ord("4")), (bits("01"), ord("6"))];
        assert_eq!(pruned_check(&t, &samples).unwrap(), PrunedReport::Pass);

        let dead = KappaTree::Binary {
            blocked: vec![bits("00000").into_bits()],
        };
        let report = pruned_check(&dead, &[(bits("00000"), ord("6"))]).unwrap();
        assert_eq!(
            report,
            PrunedReport::Fail { node: bits("00000"), level: ord("6") }
        );
    }

    #[test]
    fn s_omega_pruned() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        let samples = vec![
            (t.root(), ord("w*2+3")),
            (snode("3", &["0", "2", "5"]), ord("w^2")),
            (snode("3", &["0", "2", "5"]), ord("4")),
        ];
        assert_eq!(pruned_check(&t, &samples).unwrap(), PrunedReport::Pass);
    }

    #[test]
    fn leftmost_path_in_binary_tree() {
        let t = binary_tree();
        let p = find_path_cf_omega(&t, &CofinalSequence::naturals(), 8).unwrap();
        for k in 0..8u64 {
            let n = p.node_at(&OrdinalNotation::from_nat(k)).unwrap();
            assert_eq!(n, TreePath::leftmost().node_at(k));
        }
    }

    #[test]
    fn path_in_omega_squared_tree() {
        let t = build_s_kappa(ord("w^2"));
        let p = find_path_cf_omega(&t, &CofinalSequence::omega_times(), 5).unwrap();
        p.check_coherent().unwrap();
        // Intermediate CNF levels are reachable.
        let n = p.node_at(&ord("w*2+3")).unwrap();
        assert_eq!(t.level(&n).unwrap(), ord("w*2+3"));
        let q = extract_cofinal(&p).unwrap();
        assert!(q.len() >= 3);
    }

    #[test]
    fn s_omega_refuses_countable_sequences() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        let proposals = [
            CofinalSequence::naturals(),
            CofinalSequence {
                kind: CofinalKind::Explicit(vec![ord("0"), ord("w"), ord("w^2"), ord("w^3")]),
                declared_sup: OrdinalNotation::Omega,
            },
        ];
        for cof in proposals {
            assert!(matches!(
                find_path_cf_omega(&t, &cof, 8),
                Err(TreeError::NotCofinal(_))
            ));
        }
    }

    #[test]
    fn ledger_union_is_increasing() {
        let t = build_s_kappa(ord("w^2"));
        let p = find_path_cf_omega(&t, &CofinalSequence::omega_times(), 6).unwrap();
        let q = extract_cofinal(&p).unwrap();
        for w in q.windows(2) {
            assert!(w[0] < w[1]);
        }
        // Ledger entries bound all milestone levels seen so far.
        let max_level = p.gammas.last().unwrap();
        assert!(q.last().unwrap() >= max_level);
    }

    #[test]
    fn root_only_prefix_ledger() {
        let t = build_s_kappa(OrdinalNotation::Omega);
        let p = PathPrefix {
            tree: t.clone(),
            gammas: vec![OrdinalNotation::zero()],
            milestones: vec![t.root()],
        };
        assert_eq!(extract_cofinal(&p).unwrap(), vec![OrdinalNotation::zero()]);
    }

    #[test]
    fn canonical_paths() {
        let p = TreePath::from_stem(vec![false, true, false, false]);
        let q = TreePath::from_stem(vec![false, true]);
        assert_eq!(p, q);
        assert_eq!(p.node_at(4), bits("0100"));
        assert_eq!(p.join_with_node(&bits("011")).unwrap(), ord("2"));
        let left = TreePath::leftmost();
        assert_eq!(p.join_with_path(&left), Some(ord("1")));
        assert_eq!(left.join_with_path(&TreePath::leftmost()), None);
    }

    impl TreeNode {
        fn into_bits(self) -> Vec<bool> {
            match self {
                TreeNode::Bits(b) => b,
                _ => panic!("not bits"),
            }
        }
    }
}
