//! Property-based law checks across the library surface.

mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wmetric::monoid::{completion_add, CutElement, MonoidInstance};
use wmetric::ordinal::OrdinalNotation;
use wmetric::rational::ExtRational;
use wmetric::treespace::{binary_tree, TreeNode};
use wmetric::wspace::{seq_distance, CauchySequence, Point};
use wmetric::DistanceValue;

use common::{random_space, rational_alpha, space_points};

fn cut_eq(a: &CutElement, b: &CutElement) -> bool {
    a.leq_finite(b).unwrap() && b.leq_finite(a).unwrap()
}

fn rational_value() -> impl Strategy<Value = DistanceValue> {
    (0u32..200, 1u32..20).prop_map(|(n, d)| {
        DistanceValue::Rational(ExtRational::parse(&format!("{n}/{d}")).unwrap())
    })
}

proptest! {
    #[test]
    fn extended_rational_addition_laws(a in rational_value(), b in rational_value(), c in rational_value()) {
        let m = MonoidInstance::ExtendedRational;
        prop_assert_eq!(m.add(&a, &b).unwrap(), m.add(&b, &a).unwrap());
        prop_assert_eq!(
            m.add(&m.add(&a, &b).unwrap(), &c).unwrap(),
            m.add(&a, &m.add(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(m.add(&a, &m.zero()).unwrap(), a.clone());
        // Monotone in each argument.
        let ab = m.add(&a, &c).unwrap();
        let bb = m.add(&b, &c).unwrap();
        if m.leq(&a, &b).unwrap() {
            prop_assert!(m.leq(&ab, &bb).unwrap());
        }
    }

    #[test]
    fn principal_cut_addition_laws(a in rational_value(), b in rational_value(), c in rational_value()) {
        let m = MonoidInstance::ExtendedRational;
        let ca = CutElement::principal(&m, a);
        let cb = CutElement::principal(&m, b);
        let cc = CutElement::principal(&m, c);
        let ab = completion_add(&ca, &cb).unwrap();
        let ba = completion_add(&cb, &ca).unwrap();
        prop_assert!(cut_eq(&ab, &ba));
        let abc1 = completion_add(&ab, &cc).unwrap();
        let abc2 = completion_add(&ca, &completion_add(&cb, &cc).unwrap()).unwrap();
        prop_assert!(cut_eq(&abc1, &abc2));
        let zero = CutElement::principal(&m, m.zero());
        prop_assert!(cut_eq(&completion_add(&ca, &zero).unwrap(), &ca));
    }

    #[test]
    fn ordinal_roundtrip_and_sum_laws(
        e1 in 0u64..4, c1 in 1u64..5, k in 0u64..30, e2 in 0u64..4, c2 in 1u64..5
    ) {
        let a = OrdinalNotation::parse(&build_cnf(e1, c1, k)).unwrap();
        let b = OrdinalNotation::parse(&build_cnf(e2, c2, k / 2)).unwrap();
        prop_assert_eq!(OrdinalNotation::parse(&a.to_string()).unwrap(), a.clone());
        prop_assert_eq!(
            a.natural_sum(&b).unwrap(),
            b.natural_sum(&a).unwrap()
        );
        prop_assert!(a.natural_sum(&b).unwrap() >= a);
    }

    #[test]
    fn seq_distance_triangle_on_random_spaces(seed in 0u64..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = Arc::new(random_space(&mut rng, 2 + (seed as usize % 4)));
        let alpha = rational_alpha();
        let pts = space_points(&space);
        let pick = |rng: &mut ChaCha8Rng| -> Point {
            use rand::Rng;
            pts[rng.gen_range(0..pts.len())].clone()
        };
        let seq = |rng: &mut ChaCha8Rng| {
            CauchySequence::constant(space.clone(), alpha.clone(), pick(rng))
        };
        let (p, q, r) = (seq(&mut rng), seq(&mut rng), seq(&mut rng));
        let m = &space.monoid;
        let dpr = seq_distance(&p, &r, 4).unwrap();
        let dpq = seq_distance(&p, &q, 4).unwrap();
        let dqr = seq_distance(&q, &r, 4).unwrap();
        prop_assert!(dpr.collapsed && dpq.collapsed && dqr.collapsed);
        prop_assert!(m.leq(&dpr.lower, &m.add(&dpq.lower, &dqr.lower).unwrap()).unwrap());
    }

    #[test]
    fn join_monotone_on_binary_nodes(bits1 in proptest::collection::vec(any::<bool>(), 0..8),
                                     bits2 in proptest::collection::vec(any::<bool>(), 0..8),
                                     ext1 in proptest::collection::vec(any::<bool>(), 0..4),
                                     ext2 in proptest::collection::vec(any::<bool>(), 0..4)) {
        let t = binary_tree();
        let a = TreeNode::Bits(bits1.clone());
        let b = TreeNode::Bits(bits2.clone());
        let mut up1 = bits1;
        up1.extend(ext1);
        let mut up2 = bits2;
        up2.extend(ext2);
        let a2 = TreeNode::Bits(up1);
        let b2 = TreeNode::Bits(up2);
        // join(a', b') >= join(a, b) for extensions a' >= a, b' >= b, except
        // when a = b (where the convention join(a,a) = height applies).
        if a != b && a2 != b2 {
            prop_assert!(t.join_nodes(&a2, &b2).unwrap() >= t.join_nodes(&a, &b).unwrap());
        }
    }
}

fn build_cnf(exp: u64, coeff: u64, nat: u64) -> String {
    let mut parts = Vec::new();
    if exp >= 2 {
        parts.push(format!("w^{exp}*{coeff}"));
    } else if exp == 1 {
        parts.push(format!("w*{coeff}"));
    } else {
        return format!("{}", coeff + nat);
    }
    if nat > 0 {
        parts.push(format!("{nat}"));
    }
    parts.join("+")
}
