use std::collections::BTreeMap;

use flowcat_complexes::{BlockFailure, Report};
use flowcat_linalg::{extend_basis, kernel_basis, rref, solve, Matrix, Rational};

use crate::{BigComplex, HplError};

/// Projection and homotopy on one level, plus the factorization
/// `p = ι π` with `π ι = id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelData {
    pub p: Matrix,
    pub h: Matrix,
    pub iota: Matrix,
    pub pi: Matrix,
    /// For each column of `ι`, the basis index whose degree it carries.
    pub source_columns: Vec<usize>,
}

impl LevelData {
    /// Factors `p` through the span of its pivot columns.
    pub fn new(p: Matrix, h: Matrix) -> Result<Self, HplError> {
        let pivots = rref(&p).pivots;
        let iota = p.select_columns(&pivots);
        let pi = solve(&iota, &p)?;
        Ok(LevelData { p, h, iota, pi, source_columns: pivots })
    }

    pub fn rank(&self) -> usize {
        self.iota.cols()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PerturbationData {
    pub levels: BTreeMap<i64, LevelData>,
}

impl PerturbationData {
    /// `p = id`, `H = 0` on every level.
    pub fn trivial(a: &BigComplex) -> Self {
        let levels = a
            .levels()
            .iter()
            .map(|l| {
                let n = l.dim();
                (l.index, LevelData::new(Matrix::identity(n), Matrix::zeros(n, n)).unwrap())
            })
            .collect();
        PerturbationData { levels }
    }

    pub fn level(&self, s: i64) -> Result<&LevelData, HplError> {
        self.levels.get(&s).ok_or(HplError::MissingLevel(s))
    }
}

/// Checks `p² = p` and `id − p = d_0 H + H d_0` on every level. Failures are
/// reported at `(s, 0)`.
pub fn verify_perturbation_data(a: &BigComplex, pd: &PerturbationData) -> Result<Report, HplError> {
    let mut rep = Report::new("p² = p, id − p = d0 H + H d0");
    for l in a.levels() {
        let n = l.dim();
        let data = pd.level(l.index)?;
        for (name, m) in [("p", &data.p), ("H", &data.h)] {
            if m.shape() != (n, n) {
                return Err(HplError::ShapeMismatch {
                    level: l.index,
                    what: format!("{name} is {:?}, level has {n} generators", m.shape()),
                });
            }
        }
        let d0 = a.block_or_zero(l.index, 0);
        let idem = &(&data.p * &data.p) - &data.p;
        let lhs = &Matrix::identity(n) - &data.p;
        let rhs = &(&d0 * &data.h) + &(&data.h * &d0);
        let homotopy = &lhs - &rhs;
        let bad = idem.nonzero_count() + homotopy.nonzero_count();
        if bad > 0 {
            rep.failures.push(BlockFailure { s: l.index, k: 0, nonzero_entries: bad });
        }
    }
    Ok(rep)
}

/// Harmonic splitting `A_i = B ⊕ Hh ⊕ C` per level and degree, where `B` is
/// spanned by pivot columns of `d_0`, `Hh` completes `B` inside `ker d_0` and
/// `C` completes with standard vectors. `p` projects onto `Hh` along
/// `B ⊕ C` and `H` inverts `d_0: C -> B`.
pub fn harmonic_data(a: &BigComplex) -> Result<PerturbationData, HplError> {
    let mut levels = BTreeMap::new();
    for l in a.levels() {
        let n = l.dim();
        let d0 = a.block_or_zero(l.index, 0);
        let deg: Vec<i64> = l.generators.iter().map(|g| g.degree).collect();
        let mut degrees = deg.clone();
        degrees.sort_unstable();
        degrees.dedup();

        let mut b_vecs = Vec::new();
        let mut h_vecs = Vec::new();
        let mut c_vecs = Vec::new();
        let mut h_cols = Vec::new();
        for &k in &degrees {
            let idx: Vec<usize> = (0..n).filter(|&i| deg[i] == k).collect();
            let prev: Vec<usize> = (0..n).filter(|&i| deg[i] == k - 1).collect();
            let embed = |v: &[Rational]| {
                let mut full = vec![Rational::zero(); n];
                for (t, &i) in idx.iter().enumerate() {
                    full[i] = v[t].clone();
                }
                full
            };
            let restrict_rows = |v: &[Rational]| idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();

            let im = d0.select_columns(&prev);
            let im_local: Vec<Vec<Rational>> =
                rref(&im).pivots.iter().map(|&c| restrict_rows(&im.column(c))).collect();
            let ker_local = kernel_basis(&d0.select_columns(&idx));

            let mut span = im_local.clone();
            let mut harm = Vec::new();
            for v in &ker_local {
                span.push(v.clone());
                if flowcat_linalg::span_rank(&span, idx.len()) == span.len() {
                    harm.push(v.clone());
                } else {
                    span.pop();
                }
            }
            let rest = extend_basis(&span, idx.len());
            b_vecs.extend(im_local.iter().map(|v| embed(v)));
            for v in &harm {
                h_vecs.push(embed(v));
                h_cols.push(idx[first_nonzero(v)]);
            }
            c_vecs.extend(rest.iter().map(|&i| {
                let mut full = vec![Rational::zero(); n];
                full[idx[i]] = Rational::one();
                full
            }));
        }

        let nb = b_vecs.len();
        let nh = h_vecs.len();
        let mut all = b_vecs.clone();
        all.extend(h_vecs.iter().cloned());
        all.extend(c_vecs.iter().cloned());
        let basis = Matrix::from_columns(&all, n);
        let inv = flowcat_linalg::inverse(&basis)?;
        let iota = Matrix::from_columns(&h_vecs, n);
        let pi = inv.submatrix(nb, 0, nh, n);
        let p = &iota * &pi;
        let h = if nb == 0 {
            Matrix::zeros(n, n)
        } else {
            let cm = Matrix::from_columns(&c_vecs, n);
            let bm = Matrix::from_columns(&b_vecs, n);
            let x = solve(&(&d0 * &cm), &bm)?;
            &(&cm * &x) * &inv.submatrix(0, 0, nb, n)
        };
        levels.insert(l.index, LevelData { p, h, iota, pi, source_columns: h_cols });
    }
    Ok(PerturbationData { levels })
}

fn first_nonzero(v: &[Rational]) -> usize {
    v.iter().position(|x| !x.is_zero()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowcat_complexes::{Generator, GradedComplex, Level};

    fn acyclic_level() -> GradedComplex {
        let mut c = GradedComplex::new(vec![Level::new(
            0,
            Some(0),
            vec![Generator::new("x", 0), Generator::new("y", 1)],
        )]);
        c.set_block(0, 0, Matrix::from_i64(&[&[0, 0], &[1, 0]])).unwrap();
        c
    }

    #[test]
    fn identity_data_verifies() {
        let c = acyclic_level();
        let mut c0 = c.clone();
        c0.set_block(0, 0, Matrix::zeros(2, 2)).unwrap();
        assert!(verify_perturbation_data(&c0, &PerturbationData::trivial(&c0)).unwrap().is_empty());
    }

    #[test]
    fn zero_data_fails_on_nonzero_level() {
        let c = GradedComplex::new(vec![Level::new(0, Some(0), vec![Generator::new("x", 0)])]);
        let pd = PerturbationData {
            levels: BTreeMap::from([(0, LevelData::new(Matrix::zeros(1, 1), Matrix::zeros(1, 1)).unwrap())]),
        };
        assert_eq!(verify_perturbation_data(&c, &pd).unwrap().blocks(), vec![(0, 0)]);
    }

    #[test]
    fn acyclic_level_has_inverse_homotopy() {
        let c = acyclic_level();
        let pd = PerturbationData {
            levels: BTreeMap::from([(
                0,
                LevelData::new(Matrix::zeros(2, 2), Matrix::from_i64(&[&[0, 1], &[0, 0]])).unwrap(),
            )]),
        };
        assert!(verify_perturbation_data(&c, &pd).unwrap().is_empty());
        let hd = harmonic_data(&c).unwrap();
        assert_eq!(hd.levels[&0].h, Matrix::from_i64(&[&[0, 1], &[0, 0]]));
        assert_eq!(hd.levels[&0].rank(), 0);
    }

    #[test]
    fn shape_mismatch() {
        let c = acyclic_level();
        let pd = PerturbationData {
            levels: BTreeMap::from([(0, LevelData::new(Matrix::identity(1), Matrix::zeros(1, 1)).unwrap())]),
        };
        assert!(matches!(verify_perturbation_data(&c, &pd), Err(HplError::ShapeMismatch { level: 0, .. })));
    }
}
