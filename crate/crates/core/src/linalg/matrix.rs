use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::PolyScalar;

/// Dense row-major matrix with explicit shape, so that `0 x l` matrices keep
/// their column count.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<BigRational>;
pub type PolyMatrix = Matrix<PolyScalar>;

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row);
        }
        Matrix {
            rows: n,
            cols,
            data,
        }
    }

    pub fn empty(cols: usize) -> Self {
        Matrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "stacking matrices of different width");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn push_row(&mut self, row: Vec<T>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    /// Keeps the first `cols` columns.
    pub fn take_cols(&self, cols: usize) -> Self {
        Matrix::from_fn(self.rows, cols, |r, c| self.get(r, c).clone())
    }
}

impl<T: ExactRing> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one_elem() } else { T::zero_elem() })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero_elem())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        Matrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = T::zero_elem();
            for k in 0..self.cols {
                acc = acc.add_ref(&self.get(r, k).mul_ref(other.get(k, c)));
            }
            acc
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(ExactRing::is_zero_elem)
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[r * self.cols + c])?;
            }
            write!(f, "]")?;
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

/// An integral domain with exact division, enough for fraction-free
/// elimination.
pub trait ExactRing: Clone + PartialEq {
    fn zero_elem() -> Self;
    fn one_elem() -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `self / other`, returning `None` when the quotient is not in the ring.
    fn div_exact(&self, other: &Self) -> Option<Self>;
}

impl ExactRing for BigInt {
    fn zero_elem() -> Self {
        Zero::zero()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn div_exact(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            return None;
        }
        let (q, r) = self.div_rem(other);
        Zero::is_zero(&r).then_some(q)
    }
}

impl ExactRing for BigRational {
    fn zero_elem() -> Self {
        Zero::zero()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn div_exact(&self, other: &Self) -> Option<Self> {
        (!Zero::is_zero(other)).then(|| self / other)
    }
}

/// Result of fraction-free elimination: the nonzero echelon rows and the
/// pivot column of each.
#[derive(Debug, Clone)]
pub struct Echelon<T> {
    pub rows: Vec<Vec<T>>,
    pub pivots: Vec<usize>,
    /// Parity of the row permutation applied.
    pub swaps: usize,
}

/// Bareiss fraction-free row echelon form.
///
/// After step k every entry below the pivots is a (k+1)-minor of the input, so
/// the division by the previous pivot is exact in any integral domain.
pub fn bareiss<T: ExactRing>(m: &Matrix<T>) -> Echelon<T> {
    let mut a = m.row_vecs();
    let rows = m.rows();
    let cols = m.cols();
    let mut prev = T::one_elem();
    let mut r = 0;
    let mut pivots = Vec::new();
    let mut swaps = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero_elem()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            swaps += 1;
        }
        let (top, bottom) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in bottom.iter_mut() {
            if row[c].is_zero_elem() {
                // Rows with a zero in the pivot column still need scaling.
                for j in c + 1..cols {
                    row[j] = pivot_row[c]
                        .mul_ref(&row[j])
                        .div_exact(&prev)
                        .expect("fraction-free elimination: inexact division");
                }
                continue;
            }
            for j in c + 1..cols {
                let v = pivot_row[c]
                    .mul_ref(&row[j])
                    .sub_ref(&row[c].mul_ref(&pivot_row[j]));
                row[j] = v
                    .div_exact(&prev)
                    .expect("fraction-free elimination: inexact division");
            }
            row[c] = T::zero_elem();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Echelon {
        rows: a,
        pivots,
        swaps,
    }
}

/// Rank over the fraction field of the entry ring.
pub fn rank<T: ExactRing>(m: &Matrix<T>) -> usize {
    bareiss(m).pivots.len()
}

/// Determinant of a square matrix.
pub fn determinant<T: ExactRing>(m: &Matrix<T>) -> T {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return T::one_elem();
    }
    let e = bareiss(m);
    if e.pivots.len() < n {
        return T::zero_elem();
    }
    let d = e.rows[n - 1][n - 1].clone();
    if e.swaps % 2 == 1 {
        d.neg_ref()
    } else {
        d
    }
}

/// A basis of the right kernel over the fraction field, with entries kept in
/// the ring (Cramer numerators over the echelon pivot block).
pub fn domain_kernel<T: ExactRing>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let cols = m.cols();
    let e = bareiss(m);
    let k = e.pivots.len();
    let free: Vec<usize> = (0..cols).filter(|c| !e.pivots.contains(c)).collect();
    let pivot_block = Matrix::from_fn(k, k, |r, c| e.rows[r][e.pivots[c]].clone());
    let det = determinant(&pivot_block);
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero_elem(); cols];
            v[f] = det.clone();
            for i in 0..k {
                let replaced = Matrix::from_fn(k, k, |r, c| {
                    if c == i {
                        e.rows[r][f].clone()
                    } else {
                        e.rows[r][e.pivots[c]].clone()
                    }
                });
                v[e.pivots[i]] = determinant(&replaced).neg_ref();
            }
            v
        })
        .collect()
}

/// Reduced row echelon form over the rationals, with pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.row_vecs();
    let rows = m.rows();
    let cols = m.cols();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let factor = a[i][c].clone();
            for j in c..cols {
                let t = &factor * &a[r][j];
                a[i][j] -= t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (Matrix::from_rows(cols, a), pivots)
}

/// Canonical basis of the right kernel `{v : M v = 0}` read off the reduced
/// echelon form: one vector per free column, with a 1 in that column.
pub fn nullspace(m: &RatMatrix) -> RatMatrix {
    let cols = m.cols();
    let (r, pivots) = rref(m);
    let mut basis = Matrix::empty(cols);
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); cols];
        v[f] = BigRational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(i, f).clone();
        }
        basis.push_row(v);
    }
    basis
}

/// Scales a rational vector to a primitive integer vector with the same
/// direction (first nonzero entry keeps its sign).
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn to_rational(m: &IntMatrix) -> RatMatrix {
    m.map(|x| BigRational::from_integer(x.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_matrix, rat_matrix};

    #[test]
    fn identity_rank() {
        let m: RatMatrix = Matrix::identity(2);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn nullspace_of_single_row() {
        let n = nullspace(&rat_matrix(&[&[1, 1]]));
        assert_eq!(n, rat_matrix(&[&[-1, 1]]));
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        let n = nullspace(&Matrix::identity(3));
        assert_eq!(n.rows(), 0);
        assert_eq!(n.cols(), 3);
    }

    #[test]
    fn nullspace_of_rank_one_matrix() {
        let m = rat_matrix(&[&[1, 2, 3], &[2, 4, 6]]);
        let n = nullspace(&m);
        assert_eq!(n.rows(), 2);
        // multiply back
        assert!(m.mul(&n.transpose()).is_zero());
        assert_eq!(rank(&n), 2);
    }

    #[test]
    fn integer_determinant() {
        let m = int_matrix(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(determinant(&m), BigInt::from(18));
        let swapped = int_matrix(&[&[0, 1], &[1, 0]]);
        assert_eq!(determinant(&swapped), BigInt::from(-1));
    }

    #[test]
    fn bareiss_with_skipped_columns_stays_exact() {
        // Column 1 is dependent on column 0, forcing a skipped pivot column.
        let m = int_matrix(&[&[2, 4, 1, 3], &[1, 2, 5, 7], &[3, 6, 2, 9], &[5, 10, 7, 1]]);
        let e = bareiss(&m);
        assert_eq!(e.pivots, vec![0, 2, 3]);
    }

    #[test]
    fn domain_kernel_annihilates() {
        let m = int_matrix(&[&[1, 2, 3, 4], &[2, 3, 5, 7]]);
        let k = domain_kernel(&m);
        assert_eq!(k.len(), 2);
        let km = Matrix::from_rows(4, k);
        assert!(m.mul(&km.transpose()).is_zero());
        assert_eq!(rank(&km), 2);
    }
}
