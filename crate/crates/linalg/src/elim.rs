use num::bigint::BigInt;
use num::{Integer, One, Zero};

use crate::{LinalgError, Matrix, Rational};

/// Rank via Bareiss fraction-free elimination. Each row is first scaled by
/// the lcm of its denominators so the elimination runs over the integers.
pub fn rank(m: &Matrix) -> usize {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

pub fn rref(m: &Matrix) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let t = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = t;
            }
        }
        let inv = a[(r, c)].recip();
        for j in c..cols {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let v = &a[(r, j)] * &f;
                if !v.is_zero() {
                    a[(i, j)] -= &v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, pivots }
}

/// Basis of the null space, one vector per free column, read off the RREF.
pub fn kernel_basis(m: &Matrix) -> Vec<Vec<Rational>> {
    let Rref { matrix: a, pivots } = rref(m);
    let cols = m.cols();
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -&a[(r, f)];
        }
        out.push(v);
    }
    out
}

/// Rank of the span of `vectors`, all of length `dim`.
pub fn span_rank(vectors: &[Vec<Rational>], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&Matrix::from_columns(vectors, dim))
}

fn common_dim(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Result<usize, LinalgError> {
    let mut dim = None;
    for v in a.iter().chain(b) {
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(LinalgError::ShapeMismatch("vectors of different lengths".into()))
            }
            _ => {}
        }
    }
    Ok(dim.unwrap_or(0))
}

/// `dim span(ambient) − dim span(sub)`, failing when `sub` is not inside the
/// ambient span.
pub fn quotient_dimension(
    sub: &[Vec<Rational>],
    ambient: &[Vec<Rational>],
) -> Result<usize, LinalgError> {
    let dim = common_dim(sub, ambient)?;
    let ra = span_rank(ambient, dim);
    let rs = span_rank(sub, dim);
    let both: Vec<Vec<Rational>> = ambient.iter().chain(sub).cloned().collect();
    if span_rank(&both, dim) != ra {
        return Err(LinalgError::SubNotContained);
    }
    Ok(ra - rs)
}

/// `P·A = L·U` with `P` a permutation, `L` unit lower triangular and `U` in
/// row echelon form.
#[derive(Debug, Clone)]
pub struct Plu {
    pub p: Matrix,
    pub l: Matrix,
    pub u: Matrix,
}

pub fn plu(m: &Matrix) -> Plu {
    let (rows, cols) = m.shape();
    let mut u = m.clone();
    let mut l = Matrix::zeros(rows, rows);
    let mut perm: Vec<usize> = (0..rows).collect();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !u[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            perm.swap(p, r);
            for j in 0..cols {
                let t = u[(p, j)].clone();
                u[(p, j)] = u[(r, j)].clone();
                u[(r, j)] = t;
            }
            for j in 0..r {
                let t = l[(p, j)].clone();
                l[(p, j)] = l[(r, j)].clone();
                l[(r, j)] = t;
            }
        }
        for i in r + 1..rows {
            if u[(i, c)].is_zero() {
                continue;
            }
            let f = &u[(i, c)] / &u[(r, c)];
            for j in c..cols {
                let v = &u[(r, j)] * &f;
                u[(i, j)] -= &v;
            }
            l[(i, r)] = f;
        }
        r += 1;
    }
    for i in 0..rows {
        l[(i, i)] = Rational::one();
    }
    let mut p = Matrix::zeros(rows, rows);
    for (i, &src) in perm.iter().enumerate() {
        p[(i, src)] = Rational::one();
    }
    Plu { p, l, u }
}

/// One solution `X` of `A·X = B`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if a.rows() != b.rows() {
        return Err(LinalgError::ShapeMismatch("solve: row counts differ".into()));
    }
    let n = a.cols();
    let aug = a.hstack(b)?;
    let Rref { matrix: r, pivots } = rref(&aug);
    if pivots.iter().any(|&p| p >= n) {
        return Err(LinalgError::Inconsistent);
    }
    let mut x = Matrix::zeros(n, b.cols());
    for (row, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            x[(p, j)] = r[(row, n + j)].clone();
        }
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix, LinalgError> {
    let (r, c) = a.shape();
    if r != c {
        return Err(LinalgError::ShapeMismatch("inverse of a non-square matrix".into()));
    }
    if rank(a) != r {
        return Err(LinalgError::Singular);
    }
    solve(a, &Matrix::identity(r))
}

/// Indices of standard basis vectors that complete the independent set
/// `vectors` to a basis of the ambient space, chosen greedily in index order.
pub fn extend_basis(vectors: &[Vec<Rational>], dim: usize) -> Vec<usize> {
    let mut current: Vec<Vec<Rational>> = vectors.to_vec();
    let mut r = span_rank(&current, dim);
    let mut added = Vec::new();
    for i in 0..dim {
        if r == dim {
            break;
        }
        let mut e = vec![Rational::zero(); dim];
        e[i] = Rational::one();
        current.push(e);
        let nr = span_rank(&current, dim);
        if nr > r {
            r = nr;
            added.push(i);
        } else {
            current.pop();
        }
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::identity(2)), 2);
        assert_eq!(rank(&Matrix::zeros(3, 5)), 0);
        assert_eq!(rank(&Matrix::from_i64(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn rank_with_fractions() {
        let m = Matrix::from_vec(
            2,
            2,
            vec![Rational::new(1, 2), Rational::new(1, 3), Rational::new(3, 2), Rational::from(1)],
        )
        .unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&Matrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&Matrix::zeros(2, 3)), vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]);
        assert_eq!(kernel_basis(&Matrix::from_i64(&[&[1, 1]])), vec![v(&[-1, 1])]);
    }

    #[test]
    fn quotient_examples() {
        let e1 = v(&[1, 0]);
        let e2 = v(&[0, 1]);
        assert_eq!(quotient_dimension(&[], &[e1.clone(), e2.clone()]), Ok(2));
        assert_eq!(quotient_dimension(&[e1.clone(), e2.clone()], &[e1.clone(), e2.clone()]), Ok(0));
        assert_eq!(quotient_dimension(&[e1.clone()], &[e1.clone(), v(&[1, 1])]), Ok(1));
        assert_eq!(quotient_dimension(&[e2], &[e1]), Err(LinalgError::SubNotContained));
    }

    #[test]
    fn solve_and_inverse() {
        let a = Matrix::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a).unwrap();
        assert!((&a * &inv).is_identity());
        assert_eq!(inverse(&Matrix::from_i64(&[&[1, 2], &[2, 4]])), Err(LinalgError::Singular));
        let b = Matrix::from_i64(&[&[1], &[2]]);
        assert_eq!(solve(&Matrix::from_i64(&[&[1, 1], &[1, 1]]), &b), Err(LinalgError::Inconsistent));
    }

    #[test]
    fn extend_to_basis() {
        assert_eq!(extend_basis(&[v(&[1, 1, 0])], 3), vec![0, 2]);
        assert_eq!(extend_basis(&[], 2), vec![0, 1]);
    }

    fn small_matrix(max: usize) -> impl Strategy<Value = Matrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..=3, r * c).prop_map(move |xs| {
                Matrix::from_vec(r, c, xs.into_iter().map(Rational::from).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix(6)) {
            prop_assert_eq!(rank(&m) + kernel_basis(&m).len(), m.cols());
            for k in kernel_basis(&m) {
                prop_assert!(m.mul_vec(&k).iter().all(Rational::is_zero));
            }
        }

        #[test]
        fn bareiss_agrees_with_rref(m in small_matrix(6)) {
            prop_assert_eq!(rank(&m), rref(&m).pivots.len());
        }

        #[test]
        fn rank_of_product_is_bounded(a in small_matrix(5), seed in proptest::collection::vec(-3i64..=3, 25)) {
            let c = 1 + (seed[0].unsigned_abs() as usize % 5);
            let b = Matrix::from_vec(a.cols(), c, (0..a.cols() * c).map(|i| Rational::from(seed[i % 25])).collect()).unwrap();
            let ab = &a * &b;
            prop_assert!(rank(&ab) <= rank(&a).min(rank(&b)));
        }

        #[test]
        fn plu_reproduces_input(m in small_matrix(6)) {
            let Plu { p, l, u } = plu(&m);
            prop_assert_eq!(&p * &m, &l * &u);
            for i in 0..l.rows() {
                prop_assert!(l[(i, i)].is_one());
                for j in i + 1..l.cols() {
                    prop_assert!(l[(i, j)].is_zero());
                }
            }
        }
    }
}
