//! Vector groups with a finite tuple of generators, and their connected
//! algebraic subgroups carried as saturated coefficient lattices.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::lattice::integer_rows;
use crate::linalg::{
    bareiss, domain_kernel, left_kernel, parse_rational, rank, ExactRing, IntMatrix, Matrix,
    PolyMatrix, PolyScalar, RatMatrix, ScalarSpec, Sublattice, SymbolicScalar,
};
use crate::{Error, Result};

/// Model description as written in configuration files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    #[serde(default)]
    pub symbols: Vec<String>,
    pub generators: Vec<Vec<ScalarSpec>>,
    pub scales: Vec<String>,
}

/// A group element: `n` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub coords: Vec<SymbolicScalar>,
}

impl Point {
    pub fn rational(coords: Vec<BigRational>) -> Self {
        Point {
            coords: coords.into_iter().map(SymbolicScalar::rational).collect(),
        }
    }

    pub fn as_rational(&self) -> Option<Vec<BigRational>> {
        self.coords.iter().map(|c| c.as_rational().cloned()).collect()
    }

    pub fn to_poly(&self) -> Vec<PolyScalar> {
        self.coords.iter().map(SymbolicScalar::to_poly).collect()
    }
}

/// `G = G_a^n` with generators `γ_1..γ_l` and scales sorted descending.
#[derive(Debug, Clone)]
pub struct GroupModel {
    n: usize,
    symbols: Vec<String>,
    generators: Vec<Point>,
    scales: Vec<BigRational>,
    permutation: Vec<usize>,
    assignment: BTreeMap<String, BigRational>,
    gen_polys: Vec<Vec<PolyScalar>>,
    kernel: Sublattice,
    kernel_prefix_ranks: Vec<usize>,
    prefix_ranks: Vec<usize>,
}

impl GroupModel {
    /// Validates and sorts; `permutation[k]` is the input index of the
    /// generator now at position `k`.
    pub fn new(
        n: usize,
        symbols: Vec<String>,
        generators: Vec<Point>,
        scales: Vec<BigRational>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::ValidationError {
                field: "n".into(),
                message: "dimension must be at least 1".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        if generators.len() != scales.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators but {} scales",
                generators.len(),
                scales.len()
            )));
        }
        for (j, g) in generators.iter().enumerate() {
            if g.coords.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator {} has {} coordinates, expected {n}",
                    j + 1,
                    g.coords.len()
                )));
            }
            for c in &g.coords {
                if let Some(&k) = c.symbol_coeffs.keys().find(|&&k| k >= symbols.len()) {
                    return Err(Error::UnknownSymbol(format!("t{}", k + 1)));
                }
            }
        }
        for (j, s) in scales.iter().enumerate() {
            if *s < BigRational::one() {
                return Err(Error::InvalidScale {
                    index: j + 1,
                    value: crate::linalg::format_rational(s),
                });
            }
        }
        let mut permutation: Vec<usize> = (0..scales.len()).collect();
        permutation.sort_by(|&a, &b| scales[b].cmp(&scales[a]));
        let generators: Vec<Point> = permutation.iter().map(|&k| generators[k].clone()).collect();
        let scales: Vec<BigRational> = permutation.iter().map(|&k| scales[k].clone()).collect();
        Ok(Self::assemble(n, symbols, generators, scales, permutation, BTreeMap::new()))
    }

    fn assemble(
        n: usize,
        symbols: Vec<String>,
        generators: Vec<Point>,
        scales: Vec<BigRational>,
        permutation: Vec<usize>,
        assignment: BTreeMap<String, BigRational>,
    ) -> Self {
        let gen_polys: Vec<Vec<PolyScalar>> = generators.iter().map(Point::to_poly).collect();
        let l = generators.len();
        let mut model = GroupModel {
            n,
            symbols,
            generators,
            scales,
            permutation,
            assignment,
            gen_polys,
            kernel: Sublattice::zero(l),
            kernel_prefix_ranks: vec![0; l + 1],
            prefix_ranks: vec![0; l + 1],
        };
        model.kernel = model.span_lattice(&Matrix::identity(n));
        model.kernel_prefix_ranks = prefix_ranks(&model.kernel);
        model.prefix_ranks = (0..=l).map(|j| j - model.kernel_prefix_ranks[j]).collect();
        model
    }

    /// Model with integer coordinates and integer scales, mainly for tests.
    pub fn rational(n: usize, generators: &[&[i64]], scales: &[i64]) -> Result<Self> {
        let gens = generators
            .iter()
            .map(|g| Point::rational(g.iter().map(|&x| BigRational::from_integer(x.into())).collect()))
            .collect();
        let scales = scales
            .iter()
            .map(|&s| BigRational::from_integer(s.into()))
            .collect();
        Self::new(n, Vec::new(), gens, scales)
    }

    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        let mut gens = Vec::with_capacity(config.generators.len());
        for g in &config.generators {
            let coords = g
                .iter()
                .map(|s| SymbolicScalar::from_spec(s, &config.symbols))
                .collect::<Result<Vec<_>>>()?;
            gens.push(Point { coords });
        }
        let scales = config
            .scales
            .iter()
            .map(|s| parse_rational(s, "scales"))
            .collect::<Result<Vec<_>>>()?;
        Self::new(config.n, config.symbols.clone(), gens, scales)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators.
    pub fn l(&self) -> usize {
        self.generators.len()
    }

    /// Number of formal symbols.
    pub fn m(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    pub fn scales(&self) -> &[BigRational] {
        &self.scales
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn assignment(&self) -> &BTreeMap<String, BigRational> {
        &self.assignment
    }

    /// True when every generator coordinate is rational.
    pub fn is_rational(&self) -> bool {
        self.generators.iter().all(|g| g.as_rational().is_some())
    }

    /// Generators as rows of a rational `l x n` matrix.
    pub fn rational_generators(&self) -> Option<RatMatrix> {
        let rows = self
            .generators
            .iter()
            .map(Point::as_rational)
            .collect::<Option<Vec<_>>>()?;
        Some(Matrix::from_rows(self.n, rows))
    }

    /// Same generators with new scales, which must already be nonincreasing.
    pub fn with_scales(&self, scales: Vec<BigRational>) -> Result<Self> {
        if scales.len() != self.l() {
            return Err(Error::DimensionMismatch(format!(
                "{} scales for {} generators",
                scales.len(),
                self.l()
            )));
        }
        for (j, s) in scales.iter().enumerate() {
            if *s < BigRational::one() {
                return Err(Error::InvalidScale {
                    index: j + 1,
                    value: crate::linalg::format_rational(s),
                });
            }
        }
        if scales.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::ValidationError {
                field: "scales".into(),
                message: "replacement scales must be nonincreasing".into(),
            });
        }
        let mut m = self.clone();
        m.scales = scales;
        Ok(m)
    }

    /// Reorders a vector indexed by input generator order into model order.
    pub fn to_model_order<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.permutation.iter().map(|&k| v[k].clone()).collect()
    }

    /// `ι(v) = Σ v_j γ_j`.
    pub fn iota(&self, v: &[BigInt]) -> Vec<PolyScalar> {
        let mut out = vec![PolyScalar::default(); self.n];
        for (vj, g) in v.iter().zip(&self.gen_polys) {
            if vj.is_zero() {
                continue;
            }
            let f = BigRational::from_integer(vj.clone());
            for (o, x) in out.iter_mut().zip(g) {
                *o = o.add_ref(&x.scale(&f));
            }
        }
        out
    }

    pub fn iota_point(&self, v: &[BigInt]) -> Point {
        let mut coords = vec![SymbolicScalar::default(); self.n];
        for (vj, g) in v.iter().zip(&self.generators) {
            if vj.is_zero() {
                continue;
            }
            let f = BigRational::from_integer(vj.clone());
            for (o, x) in coords.iter_mut().zip(&g.coords) {
                *o = o.add(&x.scale(&f));
            }
        }
        Point { coords }
    }

    pub fn kernel_lattice(&self) -> &Sublattice {
        &self.kernel
    }

    /// `rk Γ_j` for `j = 0..=l`.
    pub fn prefix_ranks(&self) -> &[usize] {
        &self.prefix_ranks
    }

    /// `{v ∈ Z^l : ι(v) ∈ V}` where `V` is the common zero set of the linear
    /// forms in the rows of `annihilator`.
    fn span_lattice(&self, annihilator: &PolyMatrix) -> Sublattice {
        let l = self.l();
        // Split each form w·γ_j by monomial into rational equations in v.
        let mut equations: BTreeMap<(usize, Vec<u32>), Vec<BigRational>> = BTreeMap::new();
        for (wi, w) in annihilator.iter_rows().enumerate() {
            for (j, g) in self.gen_polys.iter().enumerate() {
                let c = w
                    .iter()
                    .zip(g)
                    .fold(PolyScalar::default(), |acc, (a, b)| acc.add_ref(&a.mul_ref(b)));
                for (mono, coeff) in c.terms() {
                    let row = equations
                        .entry((wi, mono.clone()))
                        .or_insert_with(|| vec![BigRational::zero(); l]);
                    row[j] = coeff.clone();
                }
            }
        }
        let rows: Vec<Vec<BigRational>> = equations.into_values().collect();
        let system: RatMatrix = Matrix::from_rows(l, rows);
        let ints = integer_rows(&system);
        Sublattice::new(&left_kernel(&ints.transpose()))
    }

    /// Smallest connected algebraic subgroup containing `ι(Λ)`.
    pub fn closure(&self, lambda: &Sublattice) -> Subgroup {
        assert_eq!(lambda.ambient(), self.l(), "closure: lattice width mismatch");
        let images: Vec<Vec<PolyScalar>> =
            lambda.basis().iter_rows().map(|v| self.iota(v)).collect();
        let m = Matrix::from_rows(self.n, images);
        let e = bareiss(&m);
        let dim = e.pivots.len();
        let basis = Matrix::from_rows(self.n, e.rows);
        self.subgroup_from_basis(dim, basis)
    }

    fn subgroup_from_basis(&self, dim: usize, basis: PolyMatrix) -> Subgroup {
        let annihilator = Matrix::from_rows(self.n, domain_kernel(&basis));
        let lattice = if dim == 0 {
            self.kernel.clone()
        } else if dim == self.n {
            Sublattice::full(self.l())
        } else {
            self.span_lattice(&annihilator)
        };
        Subgroup {
            dim,
            lattice,
            basis,
            annihilator,
        }
    }

    /// The subgroup spanned by explicit vectors (not necessarily in span Γ).
    pub fn subgroup_spanned_by(&self, vectors: &[Vec<PolyScalar>]) -> Result<Subgroup> {
        if let Some(v) = vectors.iter().find(|v| v.len() != self.n) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a group of dimension {}",
                v.len(),
                self.n
            )));
        }
        let e = bareiss(&Matrix::from_rows(self.n, vectors.to_vec()));
        let dim = e.pivots.len();
        Ok(self.subgroup_from_basis(dim, Matrix::from_rows(self.n, e.rows)))
    }

    pub fn zero_subgroup(&self) -> Subgroup {
        self.subgroup_from_basis(0, Matrix::empty(self.n))
    }

    pub fn full_subgroup(&self) -> Subgroup {
        Subgroup {
            dim: self.n,
            lattice: Sublattice::full(self.l()),
            basis: Matrix::identity(self.n),
            annihilator: Matrix::empty(self.n),
        }
    }

    /// `closure(Z^j x 0)`, the smallest subgroup containing `Γ_j`.
    pub fn prefix_closure(&self, j: usize) -> Subgroup {
        self.closure(&Sublattice::prefix(self.l(), j))
    }

    /// `rk(Γ_j ∩ H)` for `j = 1..=l`, with `dim H`.
    pub fn rank_profile(&self, h: &Subgroup) -> RankProfile {
        let ranks = prefix_ranks(&h.lattice);
        RankProfile {
            dim: h.dim,
            gamma_ranks: (1..=self.l())
                .map(|j| ranks[j] - self.kernel_prefix_ranks[j])
                .collect(),
        }
    }

    /// Substitutes rationals for the symbols. Symbols missing from
    /// `assignment` are drawn from `seed` when given.
    pub fn specialize(
        &self,
        assignment: &BTreeMap<String, BigRational>,
        seed: Option<u64>,
    ) -> Result<GroupModel> {
        if let Some(name) = assignment.keys().find(|k| !self.symbols.contains(k)) {
            return Err(Error::UnknownSymbol(name.clone()));
        }
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let mut values = Vec::with_capacity(self.m());
        let mut used = self.assignment.clone();
        for name in &self.symbols {
            let v = match (assignment.get(name), rng.as_mut()) {
                (Some(v), _) => v.clone(),
                (None, Some(rng)) => {
                    let p: i64 = rng.random_range(-1_000_000_000..=1_000_000_000);
                    let q: i64 = rng.random_range(1..=1_000_000_000);
                    BigRational::new(p.into(), q.into())
                }
                (None, None) => return Err(Error::MissingSymbol(name.clone())),
            };
            used.insert(name.clone(), v.clone());
            values.push(v);
        }
        let generators = self
            .generators
            .iter()
            .map(|g| Point::rational(g.coords.iter().map(|c| c.evaluate(&values)).collect()))
            .collect();
        Ok(Self::assemble(
            self.n,
            Vec::new(),
            generators,
            self.scales.clone(),
            self.permutation.clone(),
            used,
        ))
    }
}

/// `rank(L ∩ (Z^j x 0))` for `j = 0..=l`.
pub(crate) fn prefix_ranks(lattice: &Sublattice) -> Vec<usize> {
    let l = lattice.ambient();
    let total = lattice.rank();
    let basis = lattice.basis();
    (0..=l)
        .map(|j| {
            let tail: IntMatrix = Matrix::from_fn(basis.rows(), l - j, |r, c| basis.get(r, j + c).clone());
            total - rank(&tail)
        })
        .collect()
}

/// A connected algebraic subgroup `H`: its dimension, `ι⁻¹(H)`, a basis of
/// `H` and a basis of the linear forms vanishing on it.
#[derive(Clone)]
pub struct Subgroup {
    dim: usize,
    lattice: Sublattice,
    basis: PolyMatrix,
    annihilator: PolyMatrix,
}

impl Subgroup {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice(&self) -> &Sublattice {
        &self.lattice
    }

    pub fn basis(&self) -> &PolyMatrix {
        &self.basis
    }

    pub fn annihilator(&self) -> &PolyMatrix {
        &self.annihilator
    }

    pub fn contains_vector(&self, x: &[PolyScalar]) -> bool {
        self.annihilator.iter_rows().all(|w| {
            w.iter()
                .zip(x)
                .fold(PolyScalar::default(), |acc, (a, b)| acc.add_ref(&a.mul_ref(b)))
                .is_zero_elem()
        })
    }

    /// `other ⊆ self` as subspaces.
    pub fn contains(&self, other: &Subgroup) -> bool {
        other.dim <= self.dim && other.basis.iter_rows().all(|r| self.contains_vector(r))
    }

    pub fn is_full(&self, n: usize) -> bool {
        self.dim == n
    }
}

// Every subgroup is either all of G or spanned by ι of its lattice, so the
// pair (dim, lattice) determines it.
impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.lattice == other.lattice
    }
}

impl Eq for Subgroup {}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.dim, &self.lattice).cmp(&(other.dim, &other.lattice))
    }
}

impl std::hash::Hash for Subgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        self.lattice.hash(state);
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(dim={}, lattice={:?})", self.dim, self.lattice.basis())
    }
}

/// `ψ(H)`: dimension and `rk(Γ_j ∩ H)` for `j = 1..=l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankProfile {
    pub dim: usize,
    pub gamma_ranks: Vec<usize>,
}
