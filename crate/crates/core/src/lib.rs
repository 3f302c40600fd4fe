//! Exact-arithmetic generalized metric spaces over distance monoids:
//! monoid law checking and order completion, quasi-metric spaces and Cauchy
//! completion, certified fixed-point search for non-expanding maps, and
//! kappa-tree spaces including the pruned tree with no paths at symbolic
//! uncountable height.

pub mod dynsys;
pub mod monoid;
pub mod ordinal;
pub mod rational;
pub mod treespace;
pub mod wspace;

pub use dynsys::{ApproxChainNode, DenseSet, DynError, DynSystem, SearchOutcome};
pub use monoid::{
    CoinitDescriptor, CutElement, DistanceValue, InitialSequence, LawReport, MonoidError,
    MonoidInstance, MonoidLaw,
};
pub use ordinal::OrdinalNotation;
pub use rational::ExtRational;
pub use treespace::{
    CofinalKind, CofinalSequence, KappaTree, PathPrefix, PrunedReport, TreeError, TreeNode,
    TreePath,
};
pub use wspace::{
    CauchySequence, CompletenessStatus, ConvergenceReport, DenseReport, DenseSpec, EquivReport,
    Point, Presentation, SelfMap, SeqDistanceBound, SpaceError, SpaceLaw, SpaceReport, WSpace,
};
