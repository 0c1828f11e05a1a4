//! Exact linear algebra over the rationals.
//!
//! Systems are cleared of denominators row by row and reduced with Bareiss'
//! fraction-free elimination, so every intermediate entry is an integer minor
//! of the scaled system. Only back substitution touches rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{common_denominator, Rational};

/// Dense row-major rational matrix.
pub type QMatrix = Vec<Vec<Rational>>;

pub fn zeros(rows: usize, cols: usize) -> QMatrix {
    vec![vec![Rational::zero(); cols]; rows]
}

pub fn identity(n: usize) -> QMatrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    m
}

fn scale_row(row: &[Rational]) -> Vec<BigInt> {
    let d = common_denominator(row);
    row.iter()
        .map(|q| q.numer() * (&d / q.denom()))
        .collect()
}

/// Result of a fraction-free forward elimination.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<(usize, usize)>,
    swaps: usize,
}

/// Bareiss elimination restricted to the first `pivot_cols` columns.
fn bareiss(mut m: Vec<Vec<BigInt>>, pivot_cols: usize) -> Echelon {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            swaps += 1;
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                for j in (c + 1)..ncols {
                    row[j] = &row[j] * &prow[c] / &prev;
                }
            } else {
                for j in (c + 1)..ncols {
                    row[j] = (&prow[c] * &row[j] - &row[c] * &prow[j]) / &prev;
                }
                row[c] = BigInt::zero();
            }
        }
        prev = m[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { rows: m, pivots, swaps }
}

/// Exact determinant of a square matrix.
pub fn det(a: &QMatrix) -> Rational {
    let n = a.len();
    if n == 0 {
        return Rational::one();
    }
    let mut denom = BigInt::one();
    let rows: Vec<Vec<BigInt>> = a
        .iter()
        .map(|row| {
            denom *= common_denominator(row);
            scale_row(row)
        })
        .collect();
    let e = bareiss(rows, n);
    if e.pivots.len() < n {
        return Rational::zero();
    }
    let mut d = e.rows[n - 1][n - 1].clone();
    if e.swaps % 2 == 1 {
        d = -d;
    }
    Rational::new(d, denom)
}

/// Rank of a list of row vectors.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let scaled = rows.iter().map(|r| scale_row(r)).collect();
    bareiss(scaled, ncols).pivots.len()
}

/// Rank of integer row vectors.
pub fn rank_int(rows: Vec<Vec<BigInt>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    bareiss(rows, ncols).pivots.len()
}

/// Solves `A X = B` for square non-singular `A`. Returns `None` when `A` is
/// singular.
pub fn solve(a: &QMatrix, b: &QMatrix) -> Option<QMatrix> {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    if n == 0 {
        return Some(Vec::new());
    }
    let rows: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| {
            let mut row = ra.clone();
            row.extend(rb.iter().cloned());
            scale_row(&row)
        })
        .collect();
    let e = bareiss(rows, n);
    if e.pivots.len() < n {
        return None;
    }
    let m = e.rows;
    let mut x = zeros(n, k);
    for col in 0..k {
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(m[i][n + col].clone());
            for j in (i + 1)..n {
                acc -= Rational::from_integer(m[i][j].clone()) * &x[j][col];
            }
            x[i][col] = acc / Rational::from_integer(m[i][i].clone());
        }
    }
    Some(x)
}

pub fn inverse(a: &QMatrix) -> Option<QMatrix> {
    solve(a, &identity(a.len()))
}

pub fn mat_vec(a: &QMatrix, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let k = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..k)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &QMatrix) -> QMatrix {
    let c = a.first().map_or(0, Vec::len);
    (0..c).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// `xᵀ A y`.
pub fn bilinear(a: &QMatrix, x: &[Rational], y: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, row) in a.iter().enumerate() {
        if x[i].is_zero() {
            continue;
        }
        let mut s = Rational::zero();
        for (j, aij) in row.iter().enumerate() {
            if !y[j].is_zero() {
                s += aij * &y[j];
            }
        }
        acc += &x[i] * s;
    }
    acc
}

/// Exact symmetric positive-definiteness test via the LDLᵀ pivots (equivalently,
/// all leading principal minors are positive).
pub fn is_positive_definite(a: &QMatrix) -> bool {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return false;
    }
    let mut m = a.clone();
    for k in 0..n {
        if !m[k][k].is_positive() {
            return false;
        }
        for i in (k + 1)..n {
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let t = &f * &m[k][j];
                m[i][j] -= t;
            }
        }
    }
    true
}

pub fn is_symmetric(a: &QMatrix) -> bool {
    let n = a.len();
    (0..n).all(|i| a[i].len() == n && (0..i).all(|j| a[i][j] == a[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn q(rows: &[&[i64]]) -> QMatrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn determinant_small() {
        assert_eq!(det(&q(&[&[2, 1], &[1, 2]])), int(3));
        assert_eq!(det(&q(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(det(&q(&[&[1, 2], &[2, 4]])), int(0));
        let h = vec![
            vec![int(1), ratio(1, 2), ratio(1, 3)],
            vec![ratio(1, 2), ratio(1, 3), ratio(1, 4)],
            vec![ratio(1, 3), ratio(1, 4), ratio(1, 5)],
        ];
        assert_eq!(det(&h), ratio(1, 2160));
    }

    #[test]
    fn rank_with_skipped_columns() {
        let m = q(&[&[0, 1, 2], &[0, 2, 4], &[0, 0, 1]]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn singular_solve_is_none() {
        assert!(solve(&q(&[&[1, 1], &[1, 1]]), &q(&[&[1], &[2]])).is_none());
    }

    #[test]
    fn pd_test() {
        assert!(is_positive_definite(&q(&[&[2, 1], &[1, 2]])));
        assert!(!is_positive_definite(&q(&[&[1, 2], &[2, 1]])));
        assert!(!is_positive_definite(&q(&[&[0, 0], &[0, 1]])));
    }

    proptest! {
        #[test]
        fn solve_then_multiply(entries in proptest::collection::vec(-9i64..10, 16), rhs in proptest::collection::vec(-9i64..10, 4)) {
            let a: QMatrix = entries.chunks(4).map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            let b: QMatrix = rhs.iter().map(|&x| vec![int(x)]).collect();
            match solve(&a, &b) {
                Some(x) => prop_assert_eq!(mat_mul(&a, &x), b),
                None => prop_assert_eq!(det(&a), int(0)),
            }
        }

        #[test]
        fn det_is_multiplicative(e1 in proptest::collection::vec(-5i64..6, 9), e2 in proptest::collection::vec(-5i64..6, 9)) {
            let a: QMatrix = e1.chunks(3).map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            let b: QMatrix = e2.chunks(3).map(|r| r.iter().map(|&x| ratio(x, 2)).collect()).collect();
            prop_assert_eq!(det(&mat_mul(&a, &b)), det(&a) * det(&b));
        }
    }
}
