use std::collections::BTreeSet;
use std::sync::Arc;

use flowcat_core::*;
use flowcat_oracles::{circle_kernel, ChainedOracle, MorseCountOracle, TabulatedOracle, ZeroOracle};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn morse_key(kind: PairingKind, from: i64, to: i64) -> PairingKey {
    PairingKey::new(kind, vec![vec![from], vec![to]], 0, 0)
}

fn table(entries: &[(PairingKey, Rational)]) -> TabulatedOracle {
    let mut t = TabulatedOracle::default();
    for (k, v) in entries {
        t.insert(k.clone(), v.clone());
    }
    t
}

/// Positions on the circle as turn fractions.
struct Circle {
    p: Rational,
    q: Rational,
    q_end: Rational,
}

impl Circle {
    fn arc(&self) -> Rational {
        let t = &self.q_end - &self.q;
        if t.is_negative() {
            &t + &Rational::one()
        } else {
            t
        }
    }

    fn contains_p(&self) -> bool {
        let u = &self.p - &self.q;
        let u = if u.is_negative() { &u + &Rational::one() } else { u };
        !u.is_zero() && u < self.arc()
    }

    /// `f(p,q) − f(p,q')` from the circle kernel, snapped to a fraction.
    fn kernel_difference(&self) -> Rational {
        let tau = 2.0 * std::f64::consts::PI;
        let (p, a, b) = (self.p.to_f64() * tau, self.q.to_f64() * tau, self.q_end.to_f64() * tau);
        Rational::snap(circle_kernel(p, a) - circle_kernel(p, b), 64, 1e-9).unwrap()
    }
}

/// `C: x0 → x1`, `D = S¹`, `E: z0 → z1`, with `H_00 = {p}`, `F_00 = {q, q'}`
/// and `F_01` the arc from `q` to `q'`.
fn composition(c: &Circle, sigma_e: i64) -> CompositionModel {
    let cc = FlowCategoryModel::new(
        vec![CatLevel::points(0, Some(0), &["x0"]), CatLevel::points(1, Some(1), &["x1"])],
        [(0, 1, 0)],
        Arc::new(MorseCountOracle::new().with(PairingKind::Category, 0, 1, Matrix::from_i64(&[&[1]]))),
    )
    .unwrap();
    let d = FlowCategoryModel::new(
        vec![CatLevel::new(0, 1, Some(-1), vec![Generator::new("1", 0), Generator::new("vol", 1)])],
        [],
        Arc::new(ZeroOracle),
    )
    .unwrap();
    let e = FlowCategoryModel::new(
        vec![CatLevel::points(0, Some(-1), &["z0"]), CatLevel::points(1, Some(0), &["z1"])],
        [(0, 1, 0)],
        Arc::new(MorseCountOracle::new().with(PairingKind::Category, 0, 1, Matrix::from_i64(&[&[sigma_e]]))),
    )
    .unwrap();
    let o = Rational::from(sigma_e);
    let h = FlowMorphismModel::new(
        cc.clone(),
        d.clone(),
        [(0, 0, 0)],
        Arc::new(table(&[(morse_key(PairingKind::Morphism, 0, 0), Rational::one())])),
    )
    .unwrap();
    let f_table = table(&[
        (morse_key(PairingKind::Morphism, 0, 0), Rational::zero()),
        (PairingKey::new(PairingKind::Morphism, vec![vec![0], vec![1]], 1, 0), &o * &c.arc()),
    ]);
    let f = FlowMorphismModel::new(d, e, [(0, 0, 0), (0, 1, 1)], Arc::new(f_table)).unwrap();
    let inside = if c.contains_p() { o.clone() } else { Rational::zero() };
    let composite = table(&[(morse_key(PairingKind::Morphism, 0, 1), inside)]);
    let mixed = table(&[(
        PairingKey::new(PairingKind::Mixed, vec![vec![0], vec![0], vec![0]], 0, 0),
        &o * &c.kernel_difference(),
    )]);
    CompositionModel::new(h, f, Arc::new(composite), Arc::new(mixed)).unwrap()
}

#[test]
fn kernel_difference_is_arc_minus_indicator() {
    let c = Circle { p: q(1, 2), q: q(1, 4), q_end: q(3, 4) };
    assert_eq!(c.kernel_difference(), q(-1, 2));
    let c = Circle { p: q(1, 8), q: q(1, 4), q_end: q(3, 4) };
    assert_eq!(c.kernel_difference(), q(1, 2));
}

#[test]
fn composition_homotopy_closes() {
    let cases = [
        Circle { p: q(1, 8), q: q(1, 4), q_end: q(3, 4) },
        Circle { p: q(1, 2), q: q(1, 4), q_end: q(3, 4) },
        Circle { p: q(7, 8), q: q(3, 4), q_end: q(1, 8) },
    ];
    for c in &cases {
        let hom = assemble_composition_homotopy(&composition(c, 1)).unwrap();
        let rep = hom.verify_chain_homotopy();
        assert!(rep.is_empty(), "p = {}: {rep}", c.p);
        assert_eq!(hom.op.blocks().len(), 1);
        assert_eq!(hom.op.block(0, 0).unwrap()[(0, 0)], &c.arc() - &Rational::from(c.contains_p() as i64));
    }
}

#[test]
fn composition_with_wrong_mixed_value_fails() {
    let c = Circle { p: q(1, 8), q: q(1, 4), q_end: q(3, 4) };
    let mut comp = composition(&c, 1);
    comp.mixed = Arc::new(ZeroOracle);
    let rep = assemble_composition_homotopy(&comp).unwrap().verify_chain_homotopy();
    assert_eq!(rep.blocks(), vec![(0, 1)]);
}

#[test]
fn missing_mixed_pairing_is_not_composable() {
    let c = Circle { p: q(1, 8), q: q(1, 4), q_end: q(3, 4) };
    let mut comp = composition(&c, 1);
    comp.mixed = Arc::new(TabulatedOracle::default().strict());
    assert!(matches!(assemble_composition_homotopy(&comp), Err(FlowError::NotComposable(_))));
}

fn three_levels() -> FlowCategoryModel {
    FlowCategoryModel::new(
        vec![
            CatLevel::points(0, Some(0), &["a"]),
            CatLevel::points(1, Some(1), &["b"]),
            CatLevel::points(2, Some(0), &["e"]),
        ],
        [(0, 1, 0)],
        Arc::new(MorseCountOracle::new().with(PairingKind::Category, 0, 1, Matrix::from_i64(&[&[1]]))),
    )
    .unwrap()
}

/// `H = I`, `F = I` plus `F_02` counting `μ`, and `K_12` counting `λ`.
fn interval_homotopy(mu: i64, lambda: i64) -> FlowHomotopyModel {
    let c = three_levels();
    let h = identity_morphism(&c).unwrap();
    let f_oracle = ChainedOracle::new()
        .with(Arc::new(table(&[(morse_key(PairingKind::Morphism, 0, 2), Rational::from(mu))]).strict()))
        .with(Arc::new(IdentityOracle::new(&c).unwrap()));
    let mut dims: Vec<(i64, i64, i64)> = h.dims().iter().map(|(&(i, j), &d)| (i, j, d)).collect();
    dims.push((0, 2, 0));
    let f = FlowMorphismModel::new(c.clone(), c, dims, Arc::new(f_oracle)).unwrap();
    let k = table(&[(morse_key(PairingKind::Homotopy, 1, 2), Rational::from(lambda))]);
    FlowHomotopyModel::new(f, h, [(1, 2, 0), (0, 2, 1)], Arc::new(k)).unwrap()
}

#[test]
fn interval_homotopy_closes() {
    let hom = assemble_homotopy_operator(&interval_homotopy(1, -1)).unwrap();
    assert!(hom.verify_chain_homotopy().is_empty());
    assert_eq!(hom.op.block(1, 1).unwrap(), &Matrix::from_i64(&[&[-1]]));
}

#[test]
fn perturbed_homotopy_names_the_block() {
    let rep = assemble_homotopy_operator(&interval_homotopy(1, 2)).unwrap().verify_chain_homotopy();
    assert_eq!(rep.blocks(), vec![(0, 2)]);
}

#[test]
fn equal_morphisms_with_zero_homotopy() {
    let c = three_levels();
    let id = identity_morphism(&c).unwrap();
    let k = FlowHomotopyModel::new(id.clone(), id, [(1, 2, 0)], Arc::new(ZeroOracle)).unwrap();
    let hom = assemble_homotopy_operator(&k).unwrap();
    assert!(hom.op.blocks().is_empty());
    assert!(hom.verify_chain_homotopy().is_empty());
}

#[test]
fn identity_composed_with_identity() {
    let c = three_levels();
    let id = identity_morphism(&c).unwrap();
    let comp = CompositionModel::new(id.clone(), id.clone(), id.oracle().clone(), Arc::new(ZeroOracle)).unwrap();
    let hom = assemble_composition_homotopy(&comp).unwrap();
    assert!(hom.op.blocks().is_empty());
    assert!(hom.verify_chain_homotopy().is_empty());
}

#[test]
fn empty_middle_gives_zero_p() {
    let c = three_levels();
    let h = FlowMorphismModel::new(c.clone(), c.clone(), [], Arc::new(ZeroOracle)).unwrap();
    let id = identity_morphism(&c).unwrap();
    let comp = CompositionModel::new(h, id, Arc::new(ZeroOracle), Arc::new(ZeroOracle)).unwrap();
    let hom = assemble_composition_homotopy(&comp).unwrap();
    assert!(hom.op.blocks().is_empty());
    assert!(hom.verify_chain_homotopy().is_empty());
}

#[test]
fn morse_differential_counts_rigid_flows() {
    let c = three_levels();
    let d = assemble_differential(&c).unwrap();
    assert_eq!(d.block(0, 1).unwrap(), &Matrix::from_i64(&[&[1]]));
    assert_eq!(d.blocks().len(), 1);
}

#[test]
fn empty_moduli_give_zero_differential() {
    let fc = FlowCategoryModel::new(
        vec![CatLevel::points(0, None, &["a"]), CatLevel::points(1, None, &["b"])],
        [],
        Arc::new(ZeroOracle),
    )
    .unwrap();
    assert!(assemble_differential(&fc).unwrap().total_matrix().is_zero());
}

#[test]
fn level_preserving_morphism_is_diagonal() {
    let c = three_levels();
    let dims = c.levels().map(|l| (l.index, l.index, 0)).collect::<Vec<_>>();
    let scale = MorseCountOracle::new()
        .with(PairingKind::Morphism, 0, 0, Matrix::from_i64(&[&[2]]))
        .with(PairingKind::Morphism, 1, 1, Matrix::from_i64(&[&[2]]))
        .with(PairingKind::Morphism, 2, 2, Matrix::from_i64(&[&[5]]));
    let m = FlowMorphismModel::new(c.clone(), c, dims, Arc::new(scale)).unwrap();
    let phi = assemble_morphism_map(&m).unwrap();
    assert!(phi.blocks().keys().all(|&(_, k)| k == 0));
    assert!(phi.verify_chain_map().is_empty());
}

#[test]
fn trace_reports_each_term() {
    let c = three_levels();
    let a = assemble_differential_traced(&c).unwrap();
    assert_eq!(a.trace.len(), 1);
    assert_eq!(a.trace[0].sign(), 1);
    assert!(a.trace[0].to_string().contains("Category[0,1]"));
}

#[test]
fn subset_of_upper_levels() {
    let c = three_levels();
    let split = subquotient_split(&c, &BTreeSet::from([1, 2])).unwrap();
    assert!(split.verify_exact().unwrap().is_exact());
}
