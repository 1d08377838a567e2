//! Exact linear algebra over the rationals.
//!
//! Rank is computed by fraction-free (Bareiss) elimination on the
//! denominator-cleared integer matrix, which bounds the intermediate
//! coefficient swell compared to naive Gaussian elimination. A plain
//! rational LU with partial pivoting backs the many repeated solves of the
//! focal engine, where one factorization is reused across jet monomials.

use crate::rational::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Minimal integral-domain interface for fraction-free elimination.
///
/// `dom_exact_div` must be exact; Bareiss guarantees its divisions are.
pub trait DomainElem: Clone {
    fn dom_zero() -> Self;
    fn dom_one() -> Self;
    fn dom_is_zero(&self) -> bool;
    fn dom_mul(&self, other: &Self) -> Self;
    fn dom_sub(&self, other: &Self) -> Self;
    fn dom_exact_div(&self, other: &Self) -> Self;
}

impl DomainElem for BigInt {
    fn dom_zero() -> Self {
        Zero::zero()
    }
    fn dom_one() -> Self {
        One::one()
    }
    fn dom_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn dom_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn dom_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn dom_exact_div(&self, other: &Self) -> Self {
        debug_assert!((self % other).is_zero(), "inexact division in Bareiss");
        self / other
    }
}

/// Fraction-free determinant of a square matrix over an integral domain.
pub fn bareiss_determinant<T: DomainElem>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    if n == 0 {
        return T::dom_one();
    }
    let mut sign_pos = true;
    let mut prev = T::dom_one();
    for k in 0..n - 1 {
        if a[k][k].dom_is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].dom_is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign_pos = !sign_pos;
                }
                None => return T::dom_zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j]
                    .dom_mul(&a[k][k])
                    .dom_sub(&a[i][k].dom_mul(&a[k][j]));
                a[i][j] = t.dom_exact_div(&prev);
            }
            a[i][k] = T::dom_zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign_pos {
        det
    } else {
        T::dom_zero().dom_sub(&det)
    }
}

/// Fraction-free rank of a rectangular matrix over an integral domain.
pub fn bareiss_rank<T: DomainElem>(mut a: Vec<Vec<T>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = T::dom_one();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let pivot = (row..rows).find(|&i| !a[i][col].dom_is_zero());
        let Some(p) = pivot else { continue };
        a.swap(row, p);
        for i in row + 1..rows {
            for j in col + 1..cols {
                let t = a[i][j]
                    .dom_mul(&a[row][col])
                    .dom_sub(&a[i][col].dom_mul(&a[row][j]));
                a[i][j] = t.dom_exact_div(&prev);
            }
            a[i][col] = T::dom_zero();
        }
        prev = a[row][col].clone();
        rank += 1;
        row += 1;
    }
    rank
}

/// A dense matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    a: Vec<Rational>,
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            a: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    /// Clear denominators row by row, producing an integer matrix with the
    /// same rank.
    fn to_integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| {
                let mut lcm = BigInt::one();
                for v in self.row(i) {
                    lcm = num_integer::lcm(lcm, v.denom().clone());
                }
                self.row(i)
                    .iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect()
            })
            .collect()
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        bareiss_rank(self.to_integer_rows())
    }

    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        if self.rows == 0 {
            return Rational::one();
        }
        // Clear denominators per row, track the scale.
        let mut scale = Rational::one();
        let int_rows: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|i| {
                let mut lcm = BigInt::one();
                for v in self.row(i) {
                    lcm = num_integer::lcm(lcm, v.denom().clone());
                }
                scale *= Rational::new(BigInt::one(), lcm.clone());
                self.row(i)
                    .iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect()
            })
            .collect();
        scale * Rational::from_integer(bareiss_determinant(int_rows))
    }

    /// The lexicographically-first maximal independent column set, with the
    /// rank as a byproduct. Greedy from the left: a column joins the pivot
    /// set exactly when it is independent of the columns already chosen.
    pub fn pivot_columns(&self) -> (usize, Vec<usize>) {
        let mut pivots: Vec<usize> = Vec::new();
        // reduced[i] = (pivot row index, reduced column vector)
        let mut reduced: Vec<(usize, Vec<Rational>)> = Vec::new();
        for col in 0..self.cols {
            let mut v: Vec<Rational> = (0..self.rows).map(|i| self.get(i, col).clone()).collect();
            for (prow, rcol) in &reduced {
                if !v[*prow].is_zero() {
                    let f = v[*prow].clone();
                    for (vi, ri) in v.iter_mut().zip(rcol.iter()) {
                        *vi -= &f * ri;
                    }
                }
            }
            if let Some(prow) = v.iter().position(|x| !x.is_zero()) {
                let inv = v[prow].clone();
                for vi in v.iter_mut() {
                    *vi /= &inv;
                }
                reduced.push((prow, v));
                pivots.push(col);
            }
        }
        (pivots.len(), pivots)
    }

    /// The lexicographically-first maximal independent row set.
    pub fn pivot_rows(&self) -> (usize, Vec<usize>) {
        let (r, cols) = self.transpose().pivot_columns();
        (r, cols)
    }

    pub fn transpose(&self) -> QMatrix {
        let mut m = QMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    /// Submatrix by explicit row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = QMatrix::zero(rows.len(), cols.len());
        for (ri, &i) in rows.iter().enumerate() {
            for (ci, &j) in cols.iter().enumerate() {
                m.set(ri, ci, self.get(i, j).clone());
            }
        }
        m
    }
}

/// LU factorization with partial pivoting over the rationals.
///
/// Built once per homological degree and reused for every jet-monomial
/// right-hand side.
pub struct QLu {
    n: usize,
    // combined L (below diagonal, unit diagonal implicit) and U
    lu: Vec<Rational>,
    perm: Vec<usize>,
}

impl QLu {
    /// Returns `None` when the matrix is singular.
    pub fn factor(m: &QMatrix) -> Option<QLu> {
        assert_eq!(m.rows, m.cols, "LU of non-square matrix");
        let n = m.rows;
        let mut a = m.a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n).find(|&i| !a[i * n + k].is_zero())?;
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            let inv_pivot = a[k * n + k].clone();
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                let f = &a[i * n + k] / &inv_pivot;
                for j in k + 1..n {
                    let t = &f * &a[k * n + j];
                    a[i * n + j] -= t;
                }
                a[i * n + k] = f;
            }
        }
        Some(QLu { n, lu: a, perm })
    }

    pub fn solve(&self, rhs: &[Rational]) -> Vec<Rational> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        // permute then forward-substitute
        let mut y: Vec<Rational> = self.perm.iter().map(|&p| rhs[p].clone()).collect();
        for i in 1..n {
            for j in 0..i {
                if !self.lu[i * n + j].is_zero() && !y[j].is_zero() {
                    let t = &self.lu[i * n + j] * &y[j];
                    y[i] -= t;
                }
            }
        }
        // back-substitute
        for i in (0..n).rev() {
            for j in i + 1..n {
                if !self.lu[i * n + j].is_zero() && !y[j].is_zero() {
                    let t = &self.lu[i * n + j] * &y[j];
                    y[i] -= t;
                }
            }
            y[i] = &y[i] / &self.lu[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn qm(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat_int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn zero_and_identity_rank() {
        assert_eq!(QMatrix::zero(3, 3).rank(), 0);
        assert_eq!(QMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn determinant_small() {
        let m = qm(&[&[2, 1], &[7, 4]]);
        assert_eq!(m.determinant(), rat_int(1));
        let m = qm(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        assert_eq!(m.determinant(), rat_int(-3));
        let mut m = QMatrix::zero(2, 2);
        m.set(0, 0, rat(1, 2));
        m.set(0, 1, rat(1, 3));
        m.set(1, 0, rat(1, 4));
        m.set(1, 1, rat(1, 5));
        assert_eq!(m.determinant(), rat(1, 60));
    }

    #[test]
    fn pivot_columns_greedy_leftmost() {
        // col0 and col1 dependent; col2 independent
        let m = qm(&[&[1, 2, 0], &[2, 4, 1]]);
        let (r, piv) = m.pivot_columns();
        assert_eq!(r, 2);
        assert_eq!(piv, vec![0, 2]);
    }

    #[test]
    fn lu_solves_exactly() {
        let m = qm(&[&[0, 2, 1], &[1, 0, 0], &[3, 1, 1]]);
        let lu = QLu::factor(&m).unwrap();
        let rhs = vec![rat_int(5), rat_int(1), rat_int(10)];
        let x = lu.solve(&rhs);
        // verify m x = rhs
        for i in 0..3 {
            let mut acc = rat_int(0);
            for j in 0..3 {
                acc += m.get(i, j) * &x[j];
            }
            assert_eq!(acc, rhs[i]);
        }
        let singular = qm(&[&[1, 2], &[2, 4]]);
        assert!(QLu::factor(&singular).is_none());
    }

    /// Independent oracle: rank by exhaustive minor expansion, for small
    /// matrices only.
    fn minor_rank(m: &QMatrix) -> usize {
        let n = m.rows().min(m.cols());
        for size in (1..=n).rev() {
            for rows in combinations(m.rows(), size) {
                for cols in combinations(m.cols(), size) {
                    if !m.submatrix(&rows, &cols).determinant().is_zero() {
                        return size;
                    }
                }
            }
        }
        0
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut out);
        out
    }

    #[test]
    fn rank_matches_minor_expansion_and_is_scaling_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let rows = rng.gen_range(1..=5);
            let cols = rng.gen_range(1..=5);
            let mut m = QMatrix::zero(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    // sparse-ish small entries to hit degenerate ranks
                    let v = if rng.gen_bool(0.3) {
                        0
                    } else {
                        rng.gen_range(-4..=4)
                    };
                    m.set(i, j, rat_int(v));
                }
            }
            let r = m.rank();
            assert_eq!(r, minor_rank(&m));

            // invariance under row shuffle and row scaling
            let mut rows_v: Vec<Vec<Rational>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
            rows_v.reverse();
            for (i, row) in rows_v.iter_mut().enumerate() {
                let s = rat(2 * i as i64 + 1, 3);
                for v in row.iter_mut() {
                    *v *= &s;
                }
            }
            assert_eq!(QMatrix::from_rows(rows_v).rank(), r);
        }
    }
}
