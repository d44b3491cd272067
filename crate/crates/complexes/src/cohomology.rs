use std::collections::BTreeMap;

use flowcat_linalg::{kernel_basis, quotient_dimension, rank, span_rank};

use crate::{ChainMap, ComplexError, GradedComplex, Matrix, Rational};

/// Betti numbers keyed by total degree.
pub type Betti = BTreeMap<i64, usize>;

pub fn nonzero_betti(b: &Betti) -> Betti {
    b.iter().filter(|(_, &v)| v > 0).map(|(&k, &v)| (k, v)).collect()
}

fn indices_of_degree(deg: &[i64], n: i64) -> Vec<usize> {
    (0..deg.len()).filter(|&i| deg[i] == n).collect()
}

fn restrict(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out[(i, j)] = m[(r, c)].clone();
        }
    }
    out
}

fn check_complex(c: &GradedComplex) -> Result<(), ComplexError> {
    let rep = c.verify_d_squared();
    if !rep.is_empty() {
        return Err(ComplexError::NotAComplex(rep.blocks()));
    }
    Ok(())
}

/// Dimension of `ker d / im d` in each total degree that carries generators.
pub fn cohomology_betti(c: &GradedComplex) -> Result<Betti, ComplexError> {
    let deg = c.degrees().ok_or(ComplexError::Ungraded)?;
    check_complex(c)?;
    let hom = c.verify_degrees()?;
    if !hom.is_empty() {
        return Err(ComplexError::NotHomogeneous(hom.blocks()));
    }
    let d = c.total_matrix();
    let all: Vec<usize> = (0..deg.len()).collect();
    let mut out = Betti::new();
    let mut present: Vec<i64> = deg.clone();
    present.sort_unstable();
    present.dedup();
    for n in present {
        let cols_n = indices_of_degree(&deg, n);
        let cols_prev = indices_of_degree(&deg, n - 1);
        let ker = kernel_basis(&restrict(&d, &all, &cols_n));
        let im = restrict(&d, &cols_n, &cols_prev).columns();
        out.insert(n, quotient_dimension(&im, &ker)?);
    }
    Ok(out)
}

/// `dim H` ignoring degrees.
pub fn total_betti(c: &GradedComplex) -> Result<usize, ComplexError> {
    check_complex(c)?;
    let r = rank(&c.total_matrix());
    Ok(c.dim() - 2 * r)
}

/// Rank of the map induced on cohomology, in total degree `n` when both
/// complexes are graded and `n` is given, otherwise on all of `H`.
pub fn induced_rank(f: &ChainMap, n: Option<i64>) -> Result<usize, ComplexError> {
    check_complex(&f.source)?;
    check_complex(&f.target)?;
    let ds = f.source.total_matrix();
    let dt = f.target.total_matrix();
    let fm = f.total_matrix();
    let (src_cols, tgt_rows, tgt_prev) = match n {
        Some(n) => {
            let sd = f.source.degrees().ok_or(ComplexError::Ungraded)?;
            let td = f.target.degrees().ok_or(ComplexError::Ungraded)?;
            (indices_of_degree(&sd, n), indices_of_degree(&td, n), indices_of_degree(&td, n - 1))
        }
        None => ((0..f.source.dim()).collect(), (0..f.target.dim()).collect(), (0..f.target.dim()).collect()),
    };
    let all_s: Vec<usize> = (0..f.source.dim()).collect();
    let cycles = kernel_basis(&restrict(&ds, &all_s, &src_cols));
    let dim = tgt_rows.len();
    let boundaries: Vec<Vec<Rational>> = restrict(&dt, &tgt_rows, &tgt_prev).columns();
    let fm_n = restrict(&fm, &tgt_rows, &src_cols);
    let images: Vec<Vec<Rational>> = cycles.iter().map(|z| fm_n.mul_vec(z)).collect();
    let mut both = boundaries.clone();
    both.extend(images);
    Ok(span_rank(&both, dim) - span_rank(&boundaries, dim))
}
