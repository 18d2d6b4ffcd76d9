//! Exact linear algebra over the integers, the rationals and polynomial rings.

pub mod lattice;
pub mod matrix;
pub mod poly;
pub mod rational;

pub use lattice::{hnf, lattice_intersect, left_kernel, saturate, Sublattice};
pub use matrix::{
    bareiss, determinant, domain_kernel, nullspace, primitive_integer_vector, rank, rref,
    to_rational, ExactRing, IntMatrix, Matrix, PolyMatrix, RatMatrix,
};
pub use poly::{PolyScalar, ScalarSpec, SymbolicScalar};
pub use rational::{format_rational, parse_rational, pow, power_product};

/// Integer matrix from a literal; `cols` is taken from the first row.
pub fn int_matrix(rows: &[&[i64]]) -> IntMatrix {
    let cols = rows.first().map_or(0, |r| r.len());
    Matrix::from_rows(
        cols,
        rows.iter()
            .map(|r| r.iter().map(|&x| x.into()).collect())
            .collect(),
    )
}

pub fn rat_matrix(rows: &[&[i64]]) -> RatMatrix {
    to_rational(&int_matrix(rows))
}
