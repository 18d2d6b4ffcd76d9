//! Candidate subgroups for the chain certificate.
//!
//! The exhaustive set is every closure of a sublattice generated by
//! coefficient vectors of height at most `h`, i.e. every subspace spanned by
//! a subset of the images `ι(v)`, `|v|_∞ ≤ h`. These are the flats of the
//! image configuration and are enumerated rank by rank: each flat `F` is
//! extended by every image outside it, and an image already inside an
//! extension is skipped since it produces the same flat.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{phi, PhiValue};
use crate::group::{GroupModel, Subgroup};
use crate::linalg::{primitive_integer_vector, rank, ExactRing, IntMatrix, Matrix, PolyScalar, Sublattice};
use crate::{Error, Result};

/// `closure(Γ_j)` for `j = 0..=l`, and `G`.
pub fn prefix_candidates(model: &GroupModel) -> Vec<Subgroup> {
    let mut out: Vec<Subgroup> = (0..=model.l()).map(|j| model.prefix_closure(j)).collect();
    out.push(model.full_subgroup());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Exhaustive,
    Random,
    Full,
}

/// A subspace spanned by integer vectors, with integer normals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntFlat {
    pub basis: Vec<Vec<i128>>,
    pub normals: Vec<Vec<i128>>,
}

#[derive(Debug, Clone)]
pub enum Repr {
    Flat(IntFlat),
    Group(Subgroup),
}

/// A candidate `K` with `ψ(K)` and `φ(K)`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub dim: usize,
    /// `rk(Γ_j ∩ K)` for `j = 1..=l`.
    pub profile: Vec<usize>,
    pub phi: PhiValue,
    pub origin: Origin,
    pub repr: Repr,
}

impl Candidate {
    fn from_subgroup(model: &GroupModel, k: Subgroup, origin: Origin) -> Self {
        Candidate {
            dim: k.dim(),
            profile: model.rank_profile(&k).gamma_ranks,
            phi: phi(model, &k),
            origin,
            repr: Repr::Group(k),
        }
    }

    /// The candidate as a [`Subgroup`] (recomputed for integer flats).
    pub fn to_subgroup(&self, model: &GroupModel) -> Subgroup {
        match &self.repr {
            Repr::Group(k) => k.clone(),
            Repr::Flat(f) => {
                let rows: Vec<Vec<PolyScalar>> = f
                    .basis
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&x| PolyScalar::constant(BigRational::from_integer(x.into())))
                            .collect()
                    })
                    .collect();
                model
                    .subgroup_spanned_by(&rows)
                    .expect("flat basis has the group dimension")
            }
        }
    }
}

/// Options for [`exhaustive_candidates`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    /// Bound on the number of coefficient vectors in the box.
    pub box_max: u128,
    /// Bound on the number of flats produced.
    pub flat_max: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            box_max: 10_000_000,
            flat_max: 2_000_000,
        }
    }
}

/// All closures of sublattices generated by vectors of height `≤ height`,
/// together with `G`.
pub fn exhaustive_candidates(
    model: &GroupModel,
    height: u32,
    limits: EnumerationLimits,
) -> Result<Vec<Candidate>> {
    let l = model.l();
    let side = 2 * height as u128 + 1;
    let requested = side.checked_pow(l as u32).unwrap_or(u128::MAX);
    if requested > limits.box_max {
        return Err(Error::EnumerationTooLarge {
            requested,
            limit: limits.box_max,
        });
    }
    let mut out = match IntegerConfig::new(model, height) {
        Some(cfg) => cfg.flats(limits.flat_max)?,
        None => generic_flats(model, height, limits.flat_max)?,
    };
    out.push(Candidate::from_subgroup(model, model.full_subgroup(), Origin::Full));
    Ok(out)
}

/// `count` closures of random sublattices with entries in `[-5, 5]`.
pub fn random_candidates(model: &GroupModel, count: usize, seed: u64) -> Vec<Candidate> {
    let l = model.l();
    if l == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=l);
            let rows = (0..k)
                .map(|_| (0..l).map(|_| BigInt::from(rng.random_range(-5i64..=5))).collect())
                .collect();
            let h = model.closure(&Sublattice::from_rows(l, rows));
            Candidate::from_subgroup(model, h, Origin::Random)
        })
        .collect()
}

/// Coefficient vectors of the box `[-h, h]^l` with positive first nonzero
/// entry, in lexicographic order.
fn box_vectors(l: usize, h: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * h + 1) as usize;
    let total = side.pow(l as u32);
    (0..total).filter_map(move |mut idx| {
        let mut v = vec![0i64; l];
        for j in (0..l).rev() {
            v[j] = (idx % side) as i64 - h;
            idx /= side;
        }
        match v.iter().find(|&&x| x != 0) {
            Some(&x) if x > 0 => Some(v),
            _ => None,
        }
    })
}

/// Images of the box in a rational model, scaled to primitive integer
/// directions, with bounds small enough for `i128` arithmetic.
struct IntegerConfig {
    n: usize,
    /// Generators scaled to integer rows.
    gens: Vec<Vec<i128>>,
    prefix_ranks: Vec<usize>,
    points: Vec<Vec<i128>>,
    scales_len: usize,
    /// Largest normal entry for which dot products with points cannot overflow.
    normal_max: u128,
}

impl IntegerConfig {
    fn new(model: &GroupModel, height: u32) -> Option<Self> {
        let gm = model.rational_generators()?;
        let n = model.n();
        let l = model.l();
        let mut lcm = BigInt::one();
        for r in gm.iter_rows() {
            for x in r {
                lcm = lcm.lcm(x.denom());
            }
        }
        let big: Vec<Vec<BigInt>> = gm
            .iter_rows()
            .map(|r| r.iter().map(|x| x.numer() * (&lcm / x.denom())).collect())
            .collect();
        let max = big
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        // Every normal entry is a minor of image rows, so every dot product
        // is bounded by n! B^n.
        let b = max * BigInt::from(l.max(1)) * BigInt::from(height.max(1));
        let fact: BigInt = (1..=n).map(BigInt::from).product();
        let bound = fact * num_traits::pow(b, n);
        if bound.bits() > 100 {
            return None;
        }
        let gens: Vec<Vec<i128>> = big
            .iter()
            .map(|r| r.iter().map(|x| x.to_i128().expect("bounded")).collect())
            .collect();
        let mut seen = HashMap::new();
        let mut points = Vec::new();
        for v in box_vectors(l, height as i64) {
            let mut img = vec![0i128; n];
            for (j, &c) in v.iter().enumerate() {
                if c != 0 {
                    for (o, g) in img.iter_mut().zip(&gens[j]) {
                        *o += c as i128 * g;
                    }
                }
            }
            if img.iter().all(|&x| x == 0) {
                continue;
            }
            normalize(&mut img);
            if seen.insert(img.clone(), ()).is_none() {
                points.push(img);
            }
        }
        let point_max = points
            .iter()
            .chain(&gens)
            .flatten()
            .map(|x: &i128| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        Some(IntegerConfig {
            n,
            gens,
            prefix_ranks: model.prefix_ranks().to_vec(),
            normal_max: (1u128 << 120) / (n as u128 * (point_max + 1)),
            points,
            scales_len: l,
        })
    }

    fn flats(&self, flat_max: usize) -> Result<Vec<Candidate>> {
        let n = self.n;
        let p = self.points.len();
        let words = p.div_ceil(64);
        let zero = Flat {
            basis: Vec::new(),
            normals: (0..n)
                .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
                .collect(),
        };
        let mut out = vec![self.candidate(&zero)];
        let mut level: Vec<(Vec<u64>, Flat)> = vec![(vec![0; words], zero)];
        let top = self.prefix_ranks.last().copied().unwrap_or(0).min(n.saturating_sub(1));
        for rank in 1..=top {
            if rank + 1 == n {
                out.extend(self.hyperplanes(&level, flat_max - out.len().min(flat_max))?);
                break;
            }
            let mut next: HashMap<Vec<u64>, Flat> = HashMap::new();
            for (members, flat) in &level {
                let mut covered = members.clone();
                for q in 0..p {
                    if bit(&covered, q) {
                        continue;
                    }
                    let ext = self.extend(flat, q)?;
                    let mut m = vec![0u64; words];
                    for (idx, pt) in self.points.iter().enumerate() {
                        if ext.normals.iter().all(|w| dot(w, pt) == 0) {
                            m[idx / 64] |= 1 << (idx % 64);
                        }
                    }
                    for (c, x) in covered.iter_mut().zip(&m) {
                        *c |= x;
                    }
                    next.entry(m).or_insert(ext);
                }
                if next.len() + out.len() > flat_max {
                    return Err(Error::EnumerationTooLarge {
                        requested: (next.len() + out.len()) as u128,
                        limit: flat_max as u128,
                    });
                }
            }
            level = next.into_iter().collect();
            level.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            out.extend(level.iter().map(|(_, f)| self.candidate(f)));
        }
        Ok(out)
    }

    /// Hyperplanes through the flats of codimension two, keyed by their
    /// normal instead of their members.
    fn hyperplanes(&self, level: &[(Vec<u64>, Flat)], flat_max: usize) -> Result<Vec<Candidate>> {
        let mut next: HashMap<Vec<i128>, Flat> = HashMap::new();
        let mut local: HashSet<(i128, i128)> = HashSet::new();
        for (members, flat) in level {
            local.clear();
            let [w0, w1] = &flat.normals[..] else {
                unreachable!("codimension two");
            };
            for q in 0..self.points.len() {
                if bit(members, q) {
                    continue;
                }
                // The hyperplane through F and q only depends on the ratio c0 : c1.
                let pt = &self.points[q];
                let (c0, c1) = (dot(w0, pt), dot(w1, pt));
                let g = c0.gcd(&c1);
                let sign = if c0 < 0 || (c0 == 0 && c1 < 0) { -1 } else { 1 };
                if !local.insert((sign * c0 / g, sign * c1 / g)) {
                    continue;
                }
                let ext = self.extend(flat, q)?;
                next.entry(ext.normals[0].clone()).or_insert(ext);
            }
            if next.len() > flat_max {
                return Err(Error::EnumerationTooLarge {
                    requested: next.len() as u128,
                    limit: flat_max as u128,
                });
            }
        }
        let mut flats: Vec<(Vec<i128>, Flat)> = next.into_iter().collect();
        flats.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Ok(flats.iter().map(|(_, f)| self.candidate(f)).collect())
    }

    /// `F + <q>`, with normals obtained by eliminating `q` from those of `F`.
    fn extend(&self, flat: &Flat, q: usize) -> Result<Flat> {
        let mut basis = flat.basis.clone();
        basis.push(q);
        let pt = &self.points[q];
        let c: Vec<i128> = flat.normals.iter().map(|w| dot(w, pt)).collect();
        let i0 = c.iter().position(|&x| x != 0).expect("point outside the flat");
        let mut normals = Vec::with_capacity(c.len() - 1);
        for (i, w) in flat.normals.iter().enumerate() {
            if i == i0 {
                continue;
            }
            let v: Option<Vec<i128>> = w
                .iter()
                .zip(&flat.normals[i0])
                .map(|(&a, &b)| c[i0].checked_mul(a)?.checked_sub(c[i].checked_mul(b)?))
                .collect();
            match v {
                Some(mut v) if v.iter().all(|x| x.unsigned_abs() <= self.normal_max) => {
                    normalize(&mut v);
                    normals.push(v);
                }
                _ => {
                    let rows: Vec<Vec<i128>> = basis.iter().map(|&b| self.points[b].clone()).collect();
                    let normals = integer_normals(&rows, self.n).ok_or_else(overflow)?;
                    return Ok(Flat { basis, normals });
                }
            }
        }
        Ok(Flat { basis, normals })
    }

    fn candidate(&self, flat: &Flat) -> Candidate {
        let k = flat.basis.len();
        // rk(Γ_j ∩ K) = r_j - rank of the images of γ_1..γ_j under the normals.
        let mut ech: Vec<(usize, Vec<i128>)> = Vec::new();
        let mut profile = Vec::with_capacity(self.scales_len);
        let basis: Vec<Vec<i128>> = flat.basis.iter().map(|&b| self.points[b].clone()).collect();
        for j in 1..=self.scales_len {
            let v: Vec<i128> = flat.normals.iter().map(|w| dot(w, &self.gens[j - 1])).collect();
            if ech.len() < flat.normals.len() && insert_echelon(&mut ech, v).is_none() {
                let mut rows = basis.clone();
                rows.extend(self.gens[..j].iter().cloned());
                let joint = rank_i128(&rows, self.n) - k;
                ech.clear();
                ech.extend((0..joint).map(|_| (usize::MAX, Vec::new())));
            }
            profile.push(self.prefix_ranks[j] - ech.len());
        }
        let mut prev = 0i64;
        let exponents = profile
            .iter()
            .map(|&q| {
                let e = q as i64 - prev;
                prev = q as i64;
                e
            })
            .collect();
        Candidate {
            dim: k,
            profile,
            phi: PhiValue { exponents },
            origin: Origin::Exhaustive,
            repr: Repr::Flat(IntFlat {
                basis,
                normals: flat.normals.clone(),
            }),
        }
    }
}

/// A flat during enumeration: indices of spanning points and its normals.
struct Flat {
    basis: Vec<usize>,
    normals: Vec<Vec<i128>>,
}

/// Reduces `v` against echelon rows and appends it if nonzero; `None` on
/// overflow.
fn insert_echelon(ech: &mut Vec<(usize, Vec<i128>)>, mut v: Vec<i128>) -> Option<()> {
    for (p, e) in ech.iter() {
        if *p == usize::MAX {
            return None;
        }
        if v[*p] != 0 {
            let (a, b) = (e[*p], v[*p]);
            for (x, y) in v.iter_mut().zip(e) {
                *x = a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)?;
            }
            normalize(&mut v);
        }
    }
    if let Some(p) = v.iter().position(|&x| x != 0) {
        ech.push((p, v));
    }
    Some(())
}

fn overflow() -> Error {
    Error::violation("enumeration", 0, "integer overflow in flat enumeration")
}

fn bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

pub(crate) fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides by the content and makes the first nonzero entry positive.
fn normalize(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g == 0 {
        return;
    }
    let sign = if v.iter().find(|&&x| x != 0).copied().unwrap_or(1) < 0 {
        -1
    } else {
        1
    };
    for x in v.iter_mut() {
        *x = *x / g * sign;
    }
}

/// Determinant by fraction-free elimination; `None` on overflow.
fn det_i128(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let k = a.len();
    let mut prev = 1i128;
    let mut sign = 1i128;
    for c in 0..k {
        let p = (c..k).find(|&i| a[i][c] != 0)?;
        if p != c {
            a.swap(p, c);
            sign = -sign;
        }
        for i in c + 1..k {
            for j in c + 1..k {
                let v = a[c][c]
                    .checked_mul(a[i][j])?
                    .checked_sub(a[i][c].checked_mul(a[c][j])?)?;
                a[i][j] = v / prev;
            }
            a[i][c] = 0;
        }
        prev = a[c][c];
    }
    Some(sign * if k == 0 { 1 } else { a[k - 1][k - 1] })
}

fn det_or_zero(a: Vec<Vec<i128>>) -> Option<i128> {
    let k = a.len();
    // A zero pivot column means a singular matrix, not an overflow.
    let mut m = a.clone();
    let r = rank_checked(&mut m, k)?;
    if r < k {
        return Some(0);
    }
    det_i128(a)
}

/// Rank with fraction-free elimination; `None` on overflow.
fn rank_checked(a: &mut [Vec<i128>], cols: usize) -> Option<usize> {
    let rows = a.len();
    let mut prev = 1i128;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = a[r][c]
                    .checked_mul(a[i][j])?
                    .checked_sub(a[i][c].checked_mul(a[r][j])?)?;
                a[i][j] = v / prev;
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        r += 1;
    }
    Some(r)
}

/// Rank of integer rows, falling back to big integers on overflow.
pub(crate) fn rank_i128(rows: &[Vec<i128>], cols: usize) -> usize {
    let mut a = rows.to_vec();
    if let Some(r) = rank_checked(&mut a, cols) {
        return r;
    }
    let m: IntMatrix = Matrix::from_rows(
        cols,
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
    );
    rank(&m)
}

/// Primitive integer basis of the vectors orthogonal to independent `basis`
/// rows, by Cramer's rule on a nonsingular pivot block.
pub(crate) fn integer_normals(basis: &[Vec<i128>], n: usize) -> Option<Vec<Vec<i128>>> {
    let k = basis.len();
    let mut ech = basis.to_vec();
    // Pivot columns of the echelon form index a nonsingular block of `basis`.
    let mut pivots = Vec::new();
    {
        let rows = ech.len();
        let mut prev = 1i128;
        let mut r = 0;
        for c in 0..n {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| ech[i][c] != 0) else {
                continue;
            };
            ech.swap(p, r);
            for i in r + 1..rows {
                for j in c + 1..n {
                    let v = ech[r][c]
                        .checked_mul(ech[i][j])?
                        .checked_sub(ech[i][c].checked_mul(ech[r][j])?)?;
                    ech[i][j] = v / prev;
                }
                ech[i][c] = 0;
            }
            prev = ech[r][c];
            pivots.push(c);
            r += 1;
        }
    }
    assert_eq!(pivots.len(), k, "integer_normals: dependent basis");
    let block = |replace: Option<(usize, usize)>| -> Vec<Vec<i128>> {
        basis
            .iter()
            .map(|row| {
                pivots
                    .iter()
                    .enumerate()
                    .map(|(i, &pc)| match replace {
                        Some((ri, f)) if ri == i => row[f],
                        _ => row[pc],
                    })
                    .collect()
            })
            .collect()
    };
    let d = det_i128(block(None))?;
    let mut out = Vec::with_capacity(n - k);
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0i128; n];
        v[f] = d;
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = det_or_zero(block(Some((i, f))))?.checked_neg()?;
        }
        normalize(&mut v);
        out.push(v);
    }
    Some(out)
}

/// Integer rows of a matrix of constant polynomials; `None` if an entry is
/// not constant or too large.
pub(crate) fn constant_rows(rows: impl Iterator<Item = Vec<PolyScalar>>) -> Option<Vec<Vec<i128>>> {
    let mut out = Vec::new();
    for r in rows {
        let rat: Option<Vec<BigRational>> = r.iter().map(PolyScalar::as_constant).collect();
        let ints = primitive_integer_vector(&rat?);
        let row: Option<Vec<i128>> = ints.iter().map(ToPrimitive::to_i128).collect();
        out.push(row?);
    }
    Some(out)
}

/// Generic enumeration over subgroups, for symbolic models or large
/// coordinates.
fn generic_flats(model: &GroupModel, height: u32, flat_max: usize) -> Result<Vec<Candidate>> {
    let n = model.n();
    let l = model.l();
    let mut images: Vec<Vec<PolyScalar>> = Vec::new();
    for v in box_vectors(l, height as i64) {
        let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g != 1 {
            continue;
        }
        let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        let img = model.iota(&big);
        if img.iter().all(ExactRing::is_zero_elem) {
            continue;
        }
        images.push(img);
    }
    let p = images.len();
    let zero = model.zero_subgroup();
    let mut out = vec![Candidate::from_subgroup(model, zero.clone(), Origin::Exhaustive)];
    let mut level: Vec<(Vec<bool>, Subgroup)> = vec![(vec![false; p], zero)];
    let top = model.prefix_ranks().last().copied().unwrap_or(0).min(n.saturating_sub(1));
    for _rank in 1..=top {
        let mut next: BTreeMap<Vec<bool>, Subgroup> = BTreeMap::new();
        for (members, flat) in &level {
            let mut covered = members.clone();
            for q in 0..p {
                if covered[q] {
                    continue;
                }
                let mut rows = flat.basis().row_vecs();
                rows.push(images[q].clone());
                let k = model.subgroup_spanned_by(&rows)?;
                let m: Vec<bool> = images.iter().map(|x| k.contains_vector(x)).collect();
                for (c, x) in covered.iter_mut().zip(&m) {
                    *c |= *x;
                }
                next.entry(m).or_insert(k);
            }
            if next.len() + out.len() > flat_max {
                return Err(Error::EnumerationTooLarge {
                    requested: (next.len() + out.len()) as u128,
                    limit: flat_max as u128,
                });
            }
        }
        level = next.into_iter().collect();
        for (_, k) in &level {
            out.push(Candidate::from_subgroup(model, k.clone(), Origin::Exhaustive));
        }
    }
    Ok(out)
}
