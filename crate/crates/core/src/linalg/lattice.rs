//! Integer lattices in row form: Hermite normal form, kernels, saturation
//! and intersection.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{nullspace, primitive_integer_vector, to_rational, IntMatrix, Matrix};

/// Row-style Hermite normal form of the row lattice of `a`.
///
/// Pivots are positive, entries above a pivot lie in `[0, pivot)`, and zero
/// rows are dropped, so two matrices have the same row lattice iff their
/// outputs are equal.
pub fn hnf(a: &IntMatrix) -> IntMatrix {
    let cols = a.cols();
    let mut rows: Vec<Vec<BigInt>> = a
        .iter_rows()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| r.to_vec())
        .collect();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        loop {
            // Bring the smallest nonzero entry of column c to row r.
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(best) = best else { break };
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                sub_multiple(&mut rows, i, r, &q);
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r == rows.len() || rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..r {
            let q = rows[i][c].div_floor(&rows[r][c]);
            if !q.is_zero() {
                sub_multiple(&mut rows, i, r, &q);
            }
        }
        r += 1;
    }
    rows.retain(|row| row.iter().any(|x| !x.is_zero()));
    Matrix::from_rows(cols, rows)
}

fn sub_multiple(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    let src = rows[source].clone();
    for (t, s) in rows[target].iter_mut().zip(&src) {
        *t -= q * s;
    }
}

/// Lattice of integer row vectors `x` with `x a = 0`, in HNF.
pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let k = a.rows();
    let c = a.cols();
    let aug = Matrix::from_fn(k, c + k, |i, j| {
        if j < c {
            a.get(i, j).clone()
        } else if j - c == i {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    let h = hnf(&aug);
    let kernel_rows: Vec<Vec<BigInt>> = h
        .iter_rows()
        .filter(|row| row[..c].iter().all(Zero::is_zero))
        .map(|row| row[c..].to_vec())
        .collect();
    hnf(&Matrix::from_rows(k, kernel_rows))
}

/// HNF basis of `(row lattice of a, tensored with Q) ∩ Z^cols`.
pub fn saturate(a: &IntMatrix) -> IntMatrix {
    let normals = integer_rows(&nullspace(&to_rational(a)));
    left_kernel(&normals.transpose())
}

/// HNF basis of the intersection of two row lattices with equal widths.
pub fn lattice_intersect(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    assert_eq!(a.cols(), b.cols(), "lattice_intersect: width mismatch");
    let stacked = a.stack(b);
    let kernel = left_kernel(&stacked);
    let xs = kernel.take_cols(a.rows());
    hnf(&xs.mul(a))
}

/// Each rational row scaled to a primitive integer row.
pub fn integer_rows(m: &super::RatMatrix) -> IntMatrix {
    Matrix::from_rows(
        m.cols(),
        m.iter_rows().map(primitive_integer_vector).collect(),
    )
}

/// Canonical representative of `v` modulo the row lattice of an HNF matrix.
pub fn reduce_mod_hnf(h: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let mut v = v.to_vec();
    for row in h.iter_rows() {
        let Some(c) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let q = v[c].div_floor(&row[c]);
        if !q.is_zero() {
            for (x, r) in v.iter_mut().zip(row) {
                *x -= &q * r;
            }
        }
    }
    v
}

/// A sublattice of `Z^l`, stored by its HNF basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sublattice {
    basis: IntMatrix,
}

impl Sublattice {
    pub fn new(generators: &IntMatrix) -> Self {
        Sublattice {
            basis: hnf(generators),
        }
    }

    pub fn from_rows(ambient: usize, rows: Vec<Vec<BigInt>>) -> Self {
        Self::new(&Matrix::from_rows(ambient, rows))
    }

    pub fn zero(ambient: usize) -> Self {
        Sublattice {
            basis: Matrix::empty(ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Sublattice {
            basis: Matrix::identity(ambient),
        }
    }

    /// `Z^j x 0^(ambient - j)`.
    pub fn prefix(ambient: usize, j: usize) -> Self {
        Sublattice {
            basis: Matrix::from_fn(j, ambient, |r, c| {
                if r == c {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }),
        }
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn ambient(&self) -> usize {
        self.basis.cols()
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_saturated(&self) -> bool {
        saturate(&self.basis) == self.basis
    }

    pub fn saturated(&self) -> Self {
        Sublattice {
            basis: saturate(&self.basis),
        }
    }

    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        reduce_mod_hnf(&self.basis, v)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_lattice(&self, other: &Sublattice) -> bool {
        other.basis.iter_rows().all(|r| self.contains(r))
    }

    pub fn intersect(&self, other: &Sublattice) -> Self {
        Sublattice {
            basis: lattice_intersect(&self.basis, &other.basis),
        }
    }

    pub fn sum(&self, other: &Sublattice) -> Self {
        Self::new(&self.basis.stack(&other.basis))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_matrix;

    #[test]
    fn hnf_of_hnf_is_unchanged() {
        let a = int_matrix(&[&[2, 0], &[0, 3]]);
        assert_eq!(hnf(&a), a);
    }

    #[test]
    fn hnf_by_hand() {
        let a = int_matrix(&[&[1, 1], &[1, -1]]);
        assert_eq!(hnf(&a), int_matrix(&[&[1, 1], &[0, 2]]));
    }

    #[test]
    fn hnf_drops_zero_rows() {
        let h = hnf(&int_matrix(&[&[0, 0]]));
        assert_eq!(h.rows(), 0);
        assert_eq!(h.cols(), 2);
    }

    #[test]
    fn hnf_reduces_above_pivots() {
        let h = hnf(&int_matrix(&[&[1, 7, 3], &[0, 2, 5], &[0, 0, 4]]));
        assert_eq!(h, int_matrix(&[&[1, 1, 0], &[0, 2, 1], &[0, 0, 4]]));
    }

    #[test]
    fn saturation_examples() {
        assert_eq!(saturate(&int_matrix(&[&[2, 0]])), int_matrix(&[&[1, 0]]));
        assert_eq!(saturate(&int_matrix(&[&[2, 2]])), int_matrix(&[&[1, 1]]));
        assert_eq!(
            saturate(&int_matrix(&[&[1, 1], &[1, -1]])),
            Matrix::identity(2)
        );
        assert_eq!(saturate(&Matrix::empty(3)).rows(), 0);
    }

    #[test]
    fn intersection_examples() {
        let full = Matrix::identity(2);
        let b = int_matrix(&[&[1, 0], &[0, 2]]);
        assert_eq!(lattice_intersect(&full, &b), b);
        assert_eq!(
            lattice_intersect(&int_matrix(&[&[1, 0]]), &int_matrix(&[&[0, 1]])).rows(),
            0
        );
        assert_eq!(
            lattice_intersect(&int_matrix(&[&[1, 1]]), &int_matrix(&[&[1, -1]])).rows(),
            0
        );
        // 2Z ∩ 3Z = 6Z
        assert_eq!(
            lattice_intersect(&int_matrix(&[&[2]]), &int_matrix(&[&[3]])),
            int_matrix(&[&[6]])
        );
    }

    #[test]
    fn left_kernel_of_dependent_rows() {
        let k = left_kernel(&int_matrix(&[&[1], &[2]]));
        assert_eq!(k, int_matrix(&[&[2, -1]]));
    }

    #[test]
    fn coset_reduction_is_canonical() {
        let l = Sublattice::from_rows(2, vec![vec![2.into(), 1.into()], vec![0.into(), 3.into()]]);
        let v: Vec<BigInt> = vec![5.into(), 4.into()];
        let w: Vec<BigInt> = vec![5 + 2 * 3, 4 + 3 - 9].into_iter().map(BigInt::from).collect();
        assert_eq!(l.reduce(&v), l.reduce(&w));
        assert!(l.contains(&[BigInt::from(4), BigInt::from(5)]));
        assert!(!l.contains(&[BigInt::from(1), BigInt::from(0)]));
    }
}
