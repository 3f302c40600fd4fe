use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use wmetric::dynsys::{decide_fixed_point, DenseSet, DynSystem};
use wmetric::monoid::{
    canonical_initial_sequence, chain4, check_monoid_axioms, MonoidInstance,
};
use wmetric::rational::ExtRational;
use wmetric::treespace::{binary_tree, tree_metric};
use wmetric::wspace::{cauchy_completion, Point, SelfMap, WSpace};
use wmetric::DistanceValue;

fn q(s: &str) -> DistanceValue {
    DistanceValue::Rational(ExtRational::parse(s).unwrap())
}

fn swap_system() -> DynSystem {
    let monoid = MonoidInstance::ExtendedRational;
    let space = WSpace::finite(
        monoid.clone(),
        vec!["a".into(), "b".into()],
        vec![vec![q("0"), q("1/2")], vec![q("1/2"), q("0")]],
    )
    .unwrap();
    DynSystem {
        space: Arc::new(cauchy_completion(&space)),
        map: SelfMap::Table(vec![
            (Point::Sym("a".into()), Point::Sym("b".into())),
            (Point::Sym("b".into()), Point::Sym("a".into())),
        ]),
        alpha: canonical_initial_sequence(&monoid, 4).unwrap(),
        dense: DenseSet::AllFinitePoints,
    }
}

fn tree_system() -> DynSystem {
    let alpha = canonical_initial_sequence(&MonoidInstance::ExtendedRational, 4).unwrap();
    let space = cauchy_completion(&tree_metric(&binary_tree(), &alpha, true).unwrap());
    DynSystem {
        space: Arc::new(space),
        map: SelfMap::TreeLevelAdvance,
        alpha,
        dense: DenseSet::TreeNodes,
    }
}

fn benches(c: &mut Criterion) {
    c.bench_function("check_monoid_chain4", |b| {
        let m = chain4();
        b.iter(|| check_monoid_axioms(std::hint::black_box(&m)).unwrap())
    });
    c.bench_function("fixpoint_swap_certified", |b| {
        let sys = swap_system();
        b.iter(|| decide_fixed_point(std::hint::black_box(&sys), 8, 64).unwrap())
    });
    c.bench_function("fixpoint_binary_tree_depth5", |b| {
        let sys = tree_system();
        b.iter(|| decide_fixed_point(std::hint::black_box(&sys), 5, 128).unwrap())
    });
}

criterion_group!(benches_group, benches);
criterion_main!(benches_group);
