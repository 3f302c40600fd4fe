//! Shared generators for randomized tests: valid finite quasi-metric spaces
//! over exact rationals, and non-expanding self-maps on them.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use wmetric::monoid::{canonical_initial_sequence, InitialSequence, MonoidInstance};
use wmetric::rational::ExtRational;
use wmetric::wspace::{Point, SelfMap, WSpace};
use wmetric::DistanceValue;

pub fn rat(num: i64, den: i64) -> DistanceValue {
    DistanceValue::Rational(ExtRational::Finite(BigRational::new(
        BigInt::from(num),
        BigInt::from(den),
    )))
}

pub fn rational_alpha() -> InitialSequence {
    canonical_initial_sequence(&MonoidInstance::ExtendedRational, 4).unwrap()
}

fn add(a: &DistanceValue, b: &DistanceValue) -> DistanceValue {
    MonoidInstance::ExtendedRational.add(a, b).unwrap()
}

fn leq(a: &DistanceValue, b: &DistanceValue) -> bool {
    MonoidInstance::ExtendedRational.leq(a, b).unwrap()
}

/// A random valid quasi-metric on `n` named points: distances drawn from the
/// grid {1/4, 2/4, ..., 16/4} and closed under the triangle inequality by
/// shortest-path relaxation (which preserves the 1/4 lower bound).
pub fn random_space(rng: &mut impl Rng, n: usize) -> WSpace {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut matrix: Vec<Vec<DistanceValue>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        rat(0, 1)
                    } else {
                        rat(rng.gen_range(1..=16), 4)
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let via = add(&matrix[i][k], &matrix[k][j]);
                    if leq(&via, &matrix[i][j]) {
                        matrix[i][j] = via;
                    }
                }
            }
        }
    }
    WSpace::finite(MonoidInstance::ExtendedRational, names, matrix).unwrap()
}

/// All distances equal; any permutation is an isometry.
pub fn uniform_space(n: usize, num: i64, den: i64) -> WSpace {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rat(0, 1) } else { rat(num, den) })
                .collect()
        })
        .collect();
    WSpace::finite(MonoidInstance::ExtendedRational, names, matrix).unwrap()
}

pub fn space_points(space: &WSpace) -> Vec<Point> {
    space.points(usize::MAX)
}

/// The forward cycle p0 -> p1 -> ... -> p0: fixed-point-free for n >= 2.
pub fn cycle_map(space: &WSpace) -> SelfMap {
    let pts = space_points(space);
    let n = pts.len();
    SelfMap::Table(
        (0..n)
            .map(|i| (pts[i].clone(), pts[(i + 1) % n].clone()))
            .collect(),
    )
}

/// A random non-expanding self-map: rejection-sampled random function with a
/// constant-map fallback (constants are always non-expanding).
pub fn random_nonexpanding_map(rng: &mut impl Rng, space: &WSpace) -> SelfMap {
    let pts = space_points(space);
    let n = pts.len();
    'attempt: for _ in 0..40 {
        let images: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        for i in 0..n {
            for j in 0..n {
                let d = space.distance(&pts[i], &pts[j]).unwrap();
                let fd = space
                    .distance(&pts[images[i]], &pts[images[j]])
                    .unwrap();
                if !leq(&fd, &d) {
                    continue 'attempt;
                }
            }
        }
        return SelfMap::Table(
            (0..n)
                .map(|i| (pts[i].clone(), pts[images[i]].clone()))
                .collect(),
        );
    }
    SelfMap::Const(pts[rng.gen_range(0..n)].clone())
}

/// Brute-force fixed-point oracle.
pub fn brute_force_fixed_points(space: &WSpace, map: &SelfMap) -> Vec<Point> {
    space_points(space)
        .into_iter()
        .filter(|p| map.apply(space, p).unwrap() == *p)
        .collect()
}
