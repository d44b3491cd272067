use std::collections::BTreeMap;

use flowcat_complexes::{
    cohomology_betti, homotopy_limit, mapping_cone, nonzero_betti, twist_differential, Betti,
    ChainMap, GradedComplex, Generator, Level, Matrix, Rational, Tower,
};
use flowcat_linalg::inverse;
use proptest::prelude::*;

/// A unit is either a lone generator `(level, degree)` or a cancelling pair
/// from `(level, degree)` to `(level + jump, degree + 1)`.
#[derive(Debug, Clone)]
enum Unit {
    Single(i64, i64),
    Pair(i64, i64, i64),
}

fn unit() -> impl Strategy<Value = Unit> {
    prop_oneof![
        (0i64..3, 0i64..3).prop_map(|(l, d)| Unit::Single(l, d)),
        (0i64..3, 0i64..3, 0i64..2).prop_map(|(l, d, j)| Unit::Pair(l, d, j)),
    ]
}

struct Built {
    complex: GradedComplex,
}

fn build(units: &[Unit], noise: &[i64]) -> Built {
    let mut gens: Vec<(i64, i64)> = Vec::new();
    let mut edges = Vec::new();
    for u in units {
        match *u {
            Unit::Single(l, d) => gens.push((l, d)),
            Unit::Pair(l, d, j) => {
                gens.push((l, d));
                gens.push((l + j, d + 1));
                edges.push((gens.len() - 2, gens.len() - 1));
            }
        }
    }
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by_key(|&i| (gens[i].0, i));
    let pos: Vec<usize> = {
        let mut p = vec![0; gens.len()];
        for (k, &i) in order.iter().enumerate() {
            p[i] = k;
        }
        p
    };
    let n = gens.len();
    let mut d = Matrix::zeros(n, n);
    for &(a, b) in &edges {
        d[(pos[b], pos[a])] = Rational::one();
    }
    let mut g = Matrix::identity(n);
    let mut t = 0;
    for i in 0..n {
        for j in 0..i {
            let (li, di) = gens[order[i]];
            let (lj, dj) = gens[order[j]];
            if di == dj && li >= lj {
                g[(i, j)] = Rational::from(noise[t % noise.len()]);
                t += 1;
            }
        }
    }
    let dd = &(&g * &d) * &inverse(&g).unwrap();
    let mut levels: BTreeMap<i64, Vec<Generator>> = BTreeMap::new();
    for (k, &i) in order.iter().enumerate() {
        levels.entry(gens[i].0).or_default().push(Generator::new(format!("g{k}"), gens[i].1));
    }
    let levels = levels.into_iter().map(|(l, gs)| Level::new(l, Some(0), gs)).collect();
    Built { complex: GradedComplex::from_total(levels, &dd).unwrap() }
}

fn complex() -> impl Strategy<Value = GradedComplex> {
    (proptest::collection::vec(unit(), 1..6), proptest::collection::vec(-2i64..=2, 1..20))
        .prop_map(|(u, noise)| build(&u, &noise).complex)
}

fn euler(b: &Betti) -> i64 {
    b.iter().map(|(&n, &v)| if n.rem_euclid(2) == 0 { v as i64 } else { -(v as i64) }).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_complexes_square_to_zero(c in complex()) {
        prop_assert!(c.verify_d_squared().is_empty());
    }

    #[test]
    fn twist_preserves_betti(c in complex(), cs in proptest::collection::vec(0i64..3, 3)) {
        let dims: BTreeMap<i64, i64> = c.level_indices().into_iter().map(|l| (l, cs[l as usize % 3])).collect();
        let (t, rho) = twist_differential(&c, &dims).unwrap();
        prop_assert!(rho.verify_chain_map().is_empty());
        prop_assert_eq!(cohomology_betti(&t).unwrap(), cohomology_betti(&c).unwrap());
    }

    #[test]
    fn cone_euler_characteristic(a in complex(), b in complex()) {
        let f = ChainMap::zero(&a, &b);
        let cone = mapping_cone(&f).unwrap();
        prop_assert!(cone.verify_d_squared().is_empty());
        let chi = euler(&cohomology_betti(&cone).unwrap());
        prop_assert_eq!(chi, euler(&cohomology_betti(&b).unwrap()) - euler(&cohomology_betti(&a).unwrap()));
    }

    #[test]
    fn cone_of_identity_is_acyclic(c in complex()) {
        let cone = mapping_cone(&ChainMap::identity(&c)).unwrap();
        prop_assert!(cone.verify_d_squared().is_empty());
        prop_assert!(nonzero_betti(&cohomology_betti(&cone).unwrap()).is_empty());
    }

    #[test]
    fn constant_tower_holim(c in complex(), len in 1usize..4) {
        let t = Tower::constant(&c, len).unwrap();
        let h = homotopy_limit(&t).unwrap();
        prop_assert!(h.verify_d_squared().is_empty());
        prop_assert_eq!(nonzero_betti(&cohomology_betti(&h).unwrap()), nonzero_betti(&cohomology_betti(&c).unwrap()));
        prop_assert!(t.holim_report().unwrap().balanced());
    }
}
