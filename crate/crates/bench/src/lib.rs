//! Fixed models shared by the benchmarks.

use slope_chain::GroupModel;

/// `γ = e_1, e_2` in the plane.
pub fn planar(s1: i64, s2: i64) -> GroupModel {
    GroupModel::rational(2, &[&[1, 0], &[0, 1]], &[s1, s2]).expect("valid model")
}

/// Four generators in `G_a^3` with distinct scales.
pub fn dense3() -> GroupModel {
    GroupModel::rational(3, &[&[1, 2, 0], &[0, 1, -1], &[3, 0, 1], &[1, 1, 1]], &[90, 40, 12, 5])
        .expect("valid model")
}
