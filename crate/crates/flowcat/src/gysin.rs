use std::collections::BTreeMap;
use std::sync::Arc;

use flowcat_complexes::{cohomology_betti, Betti, ChainMap, GradedComplex, Generator};
use flowcat_linalg::{extend_basis, inverse, kernel_basis, rank, solve, span_rank, Matrix, Rational};
use flowcat_oracles::{OracleError, PairingKey, PairingKind, PairingOracle, PairingValue, TabulatedOracle};

use crate::{assemble_differential, assemble_morphism_map, product_category, CatLevel, FlowCategoryModel, FlowError};
use crate::{FlowMorphismModel, ProductFactor};

/// Sphere bundle over a flow category.
#[derive(Clone)]
pub enum GysinBundle {
    /// `E = C × S¹`, Euler class zero.
    Trivial,
    /// Total space model with the pullback and fiber-integration pairings.
    Tabulated { total: FlowCategoryModel, pull: Arc<dyn PairingOracle>, push: Arc<dyn PairingOracle> },
}

/// Diagonal pairings of `Π*` or `Π_*` for a product with the fiber.
struct FiberOracle {
    push: bool,
    base: BTreeMap<i64, (Matrix, Vec<i64>)>,
    fiber: Vec<(i64, Rational)>,
}

impl PairingOracle for FiberOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        if key.kind != PairingKind::Morphism || key.chain.len() != 2 {
            return Ok(None);
        }
        let (Some(&from), Some(&to)) = (key.chain[0].last(), key.chain[1].first()) else {
            return Err(OracleError::BadKey(key.to_string()));
        };
        if from != to {
            return Ok(Some(PairingValue::zero()));
        }
        if key.insertions() > 0 {
            return Ok(None);
        }
        let (q, degrees) = self.base.get(&from).ok_or_else(|| OracleError::BadKey(key.to_string()))?;
        let nb = self.fiber.len();
        let (a, g, x) = if self.push {
            (key.alpha / nb, key.gamma, key.alpha % nb)
        } else {
            (key.alpha, key.gamma / nb, key.gamma % nb)
        };
        if a >= q.rows() || g >= q.cols() {
            return Err(OracleError::BadKey(key.to_string()));
        }
        let (deg_x, int_x) = &self.fiber[x];
        let mut v = &q[(a, g)] * int_x;
        if self.push {
            v = &v * &Rational::sign_power(deg_x * degrees[g]);
        }
        Ok(Some(PairingValue::exact(v)))
    }
}

fn fiber_dims(total: &FlowCategoryModel) -> Vec<(i64, i64, i64)> {
    let mut dims: Vec<_> = total.levels().map(|l| (l.index, l.index, l.c)).collect();
    dims.extend(total.moduli().iter().map(|(&(i, j), &m)| (i, j, m + 1)));
    dims
}

/// `S²` with a circle bundle of Euler class `n·vol`. The total space level
/// carries `dψ = −n·vol`.
pub fn euler_bundle_over_sphere(n: i64) -> Result<(FlowCategoryModel, GysinBundle), FlowError> {
    let base = CatLevel::new(0, 2, Some(0), vec![Generator::new("1", 0), Generator::new("vol", 2)]);
    let fc = FlowCategoryModel::new(vec![base], [], Arc::new(flowcat_oracles::ZeroOracle))?;
    let e = CatLevel::new(
        0,
        3,
        Some(0),
        vec![Generator::new("1", 0), Generator::new("ψ", 1), Generator::new("vol", 2), Generator::new("volψ", 3)],
    );
    let mut diff = TabulatedOracle::default();
    diff.insert(PairingKey::category(&[0, 0], 1, 1), Rational::from(n));
    let total = FlowCategoryModel::new(vec![e], [], Arc::new(diff))?.with_level_differential();
    let key = |a, g| PairingKey::new(PairingKind::Morphism, vec![vec![0], vec![0]], a, g);
    let mut pull = TabulatedOracle::default();
    pull.insert(key(0, 3), Rational::one());
    pull.insert(key(1, 1), Rational::one());
    let mut push = TabulatedOracle::default();
    push.insert(key(1, 1), Rational::one());
    push.insert(key(3, 0), Rational::one());
    Ok((fc, GysinBundle::Tabulated { total, pull: Arc::new(pull), push: Arc::new(push) }))
}

/// One degree of the long exact sequence
/// `H^n(C) → H^n(E) → H^{n−k}(C) → H^{n+1}(C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesRow {
    pub degree: i64,
    pub pull_rank: usize,
    pub push_rank: usize,
    pub connecting_rank: usize,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct GysinReport {
    pub total: GradedComplex,
    pub pull: ChainMap,
    pub push: ChainMap,
    /// Connecting map on `BC^C`, exact on cocycles and zero on a complement.
    pub connecting: Matrix,
    pub short_exact: bool,
    pub les: Vec<LesRow>,
    pub betti_base: Betti,
    pub betti_total: Betti,
}

impl GysinReport {
    pub fn is_exact(&self) -> bool {
        self.short_exact && self.les.iter().all(|r| r.exact)
    }
}

fn indices(deg: &[i64], n: i64) -> Vec<usize> {
    (0..deg.len()).filter(|&i| deg[i] == n).collect()
}

/// Rank on cohomology of `m` from degree `n` of `src` to degree `n + shift` of `tgt`.
fn cohomology_rank(m: &Matrix, src: &GradedComplex, tgt: &GradedComplex, n: i64, shift: i64) -> usize {
    let (sd, td) = (src.degrees().unwrap_or_default(), tgt.degrees().unwrap_or_default());
    let ds = src.total_matrix();
    let dt = tgt.total_matrix();
    let cols = indices(&sd, n);
    let rows = indices(&td, n + shift);
    let prev = indices(&td, n + shift - 1);
    let sub = |a: &Matrix, r: &[usize], c: &[usize]| {
        let mut out = Matrix::zeros(r.len(), c.len());
        for (i, &ri) in r.iter().enumerate() {
            for (j, &cj) in c.iter().enumerate() {
                out[(i, j)] = a[(ri, cj)].clone();
            }
        }
        out
    };
    let all: Vec<usize> = (0..src.dim()).collect();
    let cycles = kernel_basis(&sub(&ds, &all, &cols));
    let boundaries = sub(&dt, &rows, &prev).columns();
    let mn = sub(m, &rows, &cols);
    let mut both = boundaries.clone();
    both.extend(cycles.iter().map(|z| mn.mul_vec(z)));
    span_rank(&both, rows.len()) - span_rank(&boundaries, rows.len())
}

fn connecting_map(d_base: &GradedComplex, d_total: &GradedComplex, pull: &Matrix, push: &Matrix) -> Result<Matrix, FlowError> {
    let n = d_base.dim();
    let section = solve(push, &Matrix::identity(n))?;
    let cycles = kernel_basis(&d_base.total_matrix());
    let lifted = &d_total.total_matrix() * &section;
    let mut images = Vec::new();
    for z in &cycles {
        let w = Matrix::from_columns(&[lifted.mul_vec(z)], lifted.rows());
        images.push(solve(pull, &w)?.column(0));
    }
    let mut basis = cycles.clone();
    for i in extend_basis(&cycles, n) {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        basis.push(e);
        images.push(vec![Rational::zero(); n]);
    }
    let b = Matrix::from_columns(&basis, n);
    let im = Matrix::from_columns(&images, n);
    Ok(&im * &inverse(&b)?)
}

/// Multiplies the blocks leaving level `s` by `(−1)^{k d_s}`, so that the
/// degree `−k` fiber integration commutes with the differentials.
fn level_signed(map: ChainMap, total: &FlowCategoryModel, k: i64) -> Result<ChainMap, FlowError> {
    let mut out = ChainMap::new(map.source.clone(), map.target.clone());
    for (&(s, kk), b) in map.blocks() {
        let g = total.level(s).and_then(|l| l.grading).unwrap_or(0);
        out.set_block(s, kk, b.scale(&Rational::sign_power(k * g)))?;
    }
    Ok(out)
}

/// `BC^E`, `φ^{Π*}`, `φ^{Π_*}` and the Gysin sequence for a sphere bundle
/// with fiber dimension `k`.
pub fn gysin_complex(fc: &FlowCategoryModel, k: i64, bundle: &GysinBundle) -> Result<GysinReport, FlowError> {
    let (total, pull_oracle, push_oracle): (FlowCategoryModel, Arc<dyn PairingOracle>, Arc<dyn PairingOracle>) =
        match bundle {
            GysinBundle::Trivial => {
                if k != 1 {
                    return Err(FlowError::UnsupportedFiberDim(k));
                }
                let circle = ProductFactor::circle();
                let ints = circle.integrals()?;
                let fiber: Vec<(i64, Rational)> = circle.generators.iter().map(|g| g.degree).zip(ints).collect();
                let mut base = BTreeMap::new();
                for l in fc.levels() {
                    base.insert(l.index, (l.integration_matrix()?, l.degrees()));
                }
                let total = product_category(fc, &circle)?;
                let pull = FiberOracle { push: false, base: base.clone(), fiber: fiber.clone() };
                let push = FiberOracle { push: true, base, fiber };
                (total, Arc::new(pull), Arc::new(push))
            }
            GysinBundle::Tabulated { total, pull, push } => (total.clone(), pull.clone(), push.clone()),
        };
    for l in fc.levels() {
        match total.level(l.index) {
            Some(e) if e.c == l.c + k => {}
            _ => return Err(FlowError::Incompatible(format!("total space level {} has the wrong dimension", l.index))),
        }
    }
    let dims = fiber_dims(&total);
    let pull_m = FlowMorphismModel::new(fc.clone(), total.clone(), dims.clone(), pull_oracle)?;
    let push_m = FlowMorphismModel::with_degree(total.clone(), fc.clone(), dims.into_iter(), -k, push_oracle)?;
    let pull = assemble_morphism_map(&pull_m)?;
    let push = level_signed(assemble_morphism_map(&push_m)?, &total, k)?;
    let d_base = assemble_differential(fc)?;
    let d_total = pull.target.clone();

    let (pm, qm) = (pull.total_matrix(), push.total_matrix());
    let composite_zero = (&qm * &pm).is_zero();
    let ker = kernel_basis(&qm);
    let mut both = pm.columns();
    both.extend(ker.iter().cloned());
    let short_exact = composite_zero
        && rank(&pm) == d_base.dim()
        && rank(&qm) == d_base.dim()
        && span_rank(&both, pm.rows()) == rank(&pm)
        && pull.verify_chain_map().is_empty()
        && push.verify_chain_map().is_empty();
    let connecting = if short_exact { connecting_map(&d_base, &d_total, &pm, &qm)? } else { Matrix::zeros(d_base.dim(), d_base.dim()) };

    let betti_base = cohomology_betti(&d_base)?;
    let betti_total = cohomology_betti(&d_total)?;
    let b = |m: &Betti, n: i64| m.get(&n).copied().unwrap_or(0);
    let degrees: Vec<i64> = {
        let mut v: Vec<i64> = betti_base.keys().chain(betti_total.keys()).copied().collect();
        v.extend(betti_base.keys().map(|d| d + k));
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut les = Vec::new();
    for &n in &degrees {
        let pull_rank = cohomology_rank(&pm, &d_base, &d_total, n, 0);
        let push_rank = cohomology_rank(&qm, &d_total, &d_base, n, -k);
        let connecting_rank = cohomology_rank(&connecting, &d_base, &d_base, n - k, k + 1);
        let next_pull = cohomology_rank(&pm, &d_base, &d_total, n + 1, 0);
        let exact = b(&betti_total, n) == pull_rank + push_rank
            && b(&betti_base, n - k) == push_rank + connecting_rank
            && b(&betti_base, n + 1) == connecting_rank + next_pull;
        les.push(LesRow { degree: n, pull_rank, push_rank, connecting_rank, exact });
    }
    Ok(GysinReport { total: d_total, pull, push, connecting, short_exact, les, betti_base, betti_total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowcat_complexes::nonzero_betti;
    use flowcat_oracles::{MorseCountOracle, ZeroOracle};

    fn sphere_morse() -> FlowCategoryModel {
        let levels = vec![
            CatLevel::points(0, Some(0), &["m1", "m2"]),
            CatLevel::points(1, Some(1), &["s"]),
            CatLevel::points(2, Some(2), &["M"]),
        ];
        let counts = MorseCountOracle::new().with(PairingKind::Category, 0, 1, Matrix::from_i64(&[&[1, 1]]));
        FlowCategoryModel::new(levels, [(0, 1, 0), (1, 2, 0)], Arc::new(counts)).unwrap()
    }

    #[test]
    fn trivial_bundle_over_a_single_space() {
        let base = CatLevel::new(0, 2, Some(0), vec![Generator::new("1", 0), Generator::new("vol", 2)]);
        let fc = FlowCategoryModel::new(vec![base], [], Arc::new(ZeroOracle)).unwrap();
        let r = gysin_complex(&fc, 1, &GysinBundle::Trivial).unwrap();
        assert!(r.is_exact());
        assert!(r.connecting.is_zero());
        assert_eq!(nonzero_betti(&r.betti_total), Betti::from([(0, 1), (1, 1), (2, 1), (3, 1)]));
    }

    #[test]
    fn trivial_bundle_over_morse_sphere() {
        let r = gysin_complex(&sphere_morse(), 1, &GysinBundle::Trivial).unwrap();
        assert!(r.is_exact(), "{:?}", r.les);
        assert_eq!(nonzero_betti(&r.betti_total), Betti::from([(0, 1), (1, 1), (2, 1), (3, 1)]));
    }

    #[test]
    fn only_circle_fibers_without_a_table() {
        assert_eq!(gysin_complex(&sphere_morse(), 2, &GysinBundle::Trivial).unwrap_err(), FlowError::UnsupportedFiberDim(2));
    }

    /// Direct two-term computation: `H*(E)` of the model `dψ = −n vol`.
    fn euler_oracle_betti(n: i64) -> Betti {
        let rk = if n == 0 { 0 } else { 1 };
        nonzero_betti(&Betti::from([(0, 1), (1, 1 - rk), (2, 1 - rk), (3, 1)]))
    }

    #[test]
    fn euler_class_over_sphere() {
        for n in [1, 2, -3] {
            let (fc, bundle) = euler_bundle_over_sphere(n).unwrap();
            let r = gysin_complex(&fc, 1, &bundle).unwrap();
            assert!(r.is_exact(), "n = {n}: {:?}", r.les);
            assert_eq!(nonzero_betti(&r.betti_total), euler_oracle_betti(n));
            // δ(1) = (−1)^{k(i−k)+dim C+1} e with i = k = 1 and dim C = 2.
            let sign = Rational::sign_power(2 + 1);
            assert_eq!(r.connecting[(1, 0)], &Rational::from(n) * &sign);
            assert!(r.connecting[(0, 0)].is_zero());
        }
    }

    #[test]
    fn zero_euler_class_matches_trivial() {
        let (fc, bundle) = euler_bundle_over_sphere(0).unwrap();
        let r = gysin_complex(&fc, 1, &bundle).unwrap();
        assert!(r.is_exact());
        assert!(r.connecting.is_zero());
        assert_eq!(nonzero_betti(&r.betti_total), euler_oracle_betti(0));
    }
}
