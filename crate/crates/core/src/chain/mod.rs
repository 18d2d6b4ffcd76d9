//! The slope filtration `H_0 ⊊ … ⊊ H_r` of a generator tuple, its slopes,
//! the per-step quantities `𝔖_i`, and the exponents `μ`, `μ*`.
//!
//! Every `φ_S(K) = Σ_j e_j log S_j` is kept as its integer exponent vector
//! `e`; comparisons reduce to comparing rational power products with 1.

pub mod candidates;
pub mod certificate;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::group::{prefix_ranks, GroupModel, Subgroup};
use crate::linalg::rational::approx;
use crate::linalg::{power_product, rank, Matrix, PolyMatrix};
use crate::{Error, Result};

pub use certificate::{verify_chain, ChainCertificate, VerifyOptions};

/// Exponent vector `e` of `Σ_j e_j log S_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhiValue {
    pub exponents: Vec<i64>,
}

impl PhiValue {
    pub fn zero(l: usize) -> Self {
        PhiValue {
            exponents: vec![0; l],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn sub(&self, other: &PhiValue) -> PhiValue {
        PhiValue {
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &PhiValue) -> PhiValue {
        PhiValue {
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, k: i64) -> PhiValue {
        PhiValue {
            exponents: self.exponents.iter().map(|e| e * k).collect(),
        }
    }

    /// `∏ S_j^{e_j}`.
    pub fn exp(&self, scales: &[BigRational]) -> BigRational {
        power_product(scales, &self.exponents)
    }

    /// Sign of `Σ e_j log S_j`.
    pub fn sign(&self, scales: &[BigRational]) -> Ordering {
        log_sign(scales, &self.exponents)
    }

    /// Display-only decimal value of `Σ e_j ln S_j`.
    pub fn approx(&self, scales: &[BigRational]) -> f64 {
        self.exponents
            .iter()
            .zip(scales)
            .map(|(&e, s)| e as f64 * approx(s).ln())
            .sum()
    }
}

/// Sign of `Σ_j exps[j] log bases[j]` for bases `≥ 1`, decided exactly.
pub fn log_sign(bases: &[BigRational], exps: &[i64]) -> Ordering {
    power_product(bases, exps).cmp(&BigRational::one())
}

/// `numerator / denominator` with a positive integer denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlopeValue {
    pub numerator: PhiValue,
    pub denominator: u64,
}

impl SlopeValue {
    pub fn new(numerator: PhiValue, denominator: u64) -> Self {
        assert!(denominator >= 1, "slope denominator must be positive");
        SlopeValue {
            numerator,
            denominator,
        }
    }

    pub fn approx(&self, scales: &[BigRational]) -> f64 {
        self.numerator.approx(scales) / self.denominator as f64
    }
}

/// Exact comparison of `a` and `b` against the scales of `model`.
pub fn compare_slopes(model: &GroupModel, a: &SlopeValue, b: &SlopeValue) -> Ordering {
    compare_slopes_in(model.scales(), a, b)
}

/// `a` vs `b` over an arbitrary log basis.
pub fn compare_slopes_in(bases: &[BigRational], a: &SlopeValue, b: &SlopeValue) -> Ordering {
    let q = b.denominator as i64;
    let p = a.denominator as i64;
    let diff: Vec<i64> = a
        .numerator
        .exponents
        .iter()
        .zip(&b.numerator.exponents)
        .map(|(e, f)| q * e - p * f)
        .collect();
    log_sign(bases, &diff)
}

/// `radicand^(1/root)`.
#[derive(Debug, Clone)]
pub struct RootedRational {
    pub radicand: BigRational,
    pub root: u32,
}

impl RootedRational {
    pub fn approx(&self) -> f64 {
        approx(&self.radicand).powf(1.0 / self.root as f64)
    }
}

impl PartialEq for RootedRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RootedRational {}

impl PartialOrd for RootedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootedRational {
    /// For positive radicands: `a^(1/p)` vs `b^(1/q)` is `a^q` vs `b^p`.
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = num_traits::pow(self.radicand.clone(), other.root as usize);
        let rhs = num_traits::pow(other.radicand.clone(), self.root as usize);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RootedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = crate::linalg::format_rational(&self.radicand);
        if self.root == 1 {
            write!(f, "{r}")
        } else {
            write!(f, "({r})^(1/{})", self.root)
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainNode {
    pub subgroup: Subgroup,
    pub dim: usize,
    pub phi: PhiValue,
}

#[derive(Debug, Clone)]
pub struct ChainStep {
    pub slope: SlopeValue,
    pub frak_s: RootedRational,
}

/// `H_0 = 0 ⊊ H_1 ⊊ … ⊊ H_r = G` with the data of each step.
#[derive(Debug, Clone)]
pub struct Chain {
    pub nodes: Vec<ChainNode>,
    pub steps: Vec<ChainStep>,
}

impl Chain {
    pub fn r(&self) -> usize {
        self.steps.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.dim).collect()
    }

    pub fn subgroups(&self) -> impl Iterator<Item = &Subgroup> {
        self.nodes.iter().map(|n| &n.subgroup)
    }

    /// Same subgroups at every position.
    pub fn same_subgroups(&self, other: &Chain) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.subgroup == b.subgroup)
    }
}

/// `φ_S(H)`: `e_j = rk(Γ_j ∩ H) − rk(Γ_{j−1} ∩ H)`.
pub fn phi(model: &GroupModel, h: &Subgroup) -> PhiValue {
    let ranks = model.rank_profile(h).gamma_ranks;
    let direct = phi_from_ranks(&ranks);
    // Σ_j rk(Γ_j ∩ H)·log(S_j / S_{j+1}) with S_{l+1} = 1.
    let l = ranks.len();
    let mut weighted = PhiValue::zero(l);
    for (j, &q) in ranks.iter().enumerate() {
        let mut c = PhiValue::zero(l);
        c.exponents[j] = 1;
        if j + 1 < l {
            c.exponents[j + 1] = -1;
        }
        weighted = weighted.add(&c.scale(q as i64));
    }
    assert_eq!(direct, weighted, "φ: rank-jump and telescoped forms disagree");
    direct
}

fn phi_from_ranks(ranks: &[usize]) -> PhiValue {
    let mut prev = 0i64;
    PhiValue {
        exponents: ranks
            .iter()
            .map(|&q| {
                let e = q as i64 - prev;
                prev = q as i64;
                e
            })
            .collect(),
    }
}

/// The chain: closed form for rational models, greedy over prefix closures
/// otherwise.
pub fn build_chain(model: &GroupModel) -> Result<Chain> {
    match fast_chain(model) {
        Some(chain) => chain,
        None => greedy_chain(model, &[]),
    }
}

/// Closed-form chain for models with rational coordinates; `None` otherwise.
///
/// With `r_j = rk Γ_j` the maximal `φ` over subgroups of dimension `d` is
/// `f(d) = Σ_j min(r_j, d)·log(S_j / S_{j+1})`; the chain sits at the
/// vertices of this concave profile.
pub fn fast_chain(model: &GroupModel) -> Option<Result<Chain>> {
    if !model.is_rational() {
        return None;
    }
    Some(fast_chain_inner(model))
}

fn fast_chain_inner(model: &GroupModel) -> Result<Chain> {
    let n = model.n();
    let l = model.l();
    let r = model.prefix_ranks();
    let scales = model.scales();
    let profile = |d: usize| PhiValue {
        exponents: (1..=l)
            .map(|j| r[j].min(d) as i64 - r[j - 1].min(d) as i64)
            .collect(),
    };
    let f: Vec<PhiValue> = (0..=n).map(profile).collect();
    let slope = |d: usize| SlopeValue::new(f[d].sub(&f[d - 1]), 1);
    let mut vertices = vec![0];
    for d in 1..n {
        if compare_slopes_in(scales, &slope(d), &slope(d + 1)) == Ordering::Greater {
            vertices.push(d);
        }
    }
    vertices.push(n);
    let one = BigRational::one();
    let strict_drop = |j: usize| {
        let next = if j < l { &scales[j] } else { &one };
        scales[j - 1] > *next
    };
    let mut subgroups = Vec::with_capacity(vertices.len());
    for &d in &vertices {
        let h = if d == 0 {
            model.zero_subgroup()
        } else if d == n {
            model.full_subgroup()
        } else {
            let j = (1..=l)
                .rev()
                .find(|&j| r[j] == d && strict_drop(j))
                .ok_or_else(|| {
                    Error::violation(
                        "fast_path",
                        vertices.len(),
                        format!("no prefix realizes the vertex at dimension {d}"),
                    )
                })?;
            model.prefix_closure(j)
        };
        let ph = phi(model, &h);
        if ph != f[d] {
            return Err(Error::violation(
                "fast_path",
                d,
                format!("φ of the vertex subgroup {:?} differs from the profile {:?}", ph, f[d]),
            ));
        }
        subgroups.push(h);
    }
    assemble_chain(model, subgroups)
}

/// Greedy construction over `{closure(Γ_j)} ∪ {G} ∪ extra`: each step takes
/// the maximal slope, ties going to the larger dimension. Two distinct
/// maximizers of equal dimension are replaced by their sum.
pub fn greedy_chain(model: &GroupModel, extra: &[Subgroup]) -> Result<Chain> {
    let mut cands = candidates::prefix_candidates(model);
    cands.extend(extra.iter().cloned());
    cands.sort();
    cands.dedup();
    let mut values: Vec<(usize, Vec<i64>)> = cands
        .iter()
        .map(|k| (k.dim(), phi(model, k).exponents))
        .collect();
    let order = loop {
        match greedy_walk(model.n(), model.scales(), &values) {
            Ok(order) => break order,
            Err(Stop::Tie { step, dim, a, b }) => {
                let mut rows = cands[a].basis().row_vecs();
                rows.extend(cands[b].basis().row_vecs());
                let sum = model.subgroup_spanned_by(&rows)?;
                if cands.contains(&sum) {
                    return Err(Error::AmbiguousCandidates { step, dim });
                }
                values.push((sum.dim(), phi(model, &sum).exponents));
                cands.push(sum);
            }
            Err(stop) => return Err(stop.into()),
        }
    };
    let subgroups = std::iter::once(model.zero_subgroup())
        .chain(order.into_iter().map(|i| cands[i].clone()))
        .collect();
    assemble_chain(model, subgroups)
}

enum Stop {
    Tie { step: usize, dim: usize, a: usize, b: usize },
    Exhausted { step: usize },
}

impl From<Stop> for Error {
    fn from(stop: Stop) -> Self {
        match stop {
            Stop::Tie { step, dim, .. } => Error::AmbiguousCandidates { step, dim },
            Stop::Exhausted { step } => Error::violation("greedy", step, "no candidate of larger dimension"),
        }
    }
}

/// Greedy rule over `(dim, exponents)` points from the origin; returns the
/// chosen indices in order, ending at a point of dimension `n`.
pub(crate) fn greedy_indices(
    n: usize,
    bases: &[BigRational],
    values: &[(usize, Vec<i64>)],
) -> Result<Vec<usize>> {
    greedy_walk(n, bases, values).map_err(Error::from)
}

fn greedy_walk(n: usize, bases: &[BigRational], values: &[(usize, Vec<i64>)]) -> std::result::Result<Vec<usize>, Stop> {
    let width = bases.len();
    let mut cur_dim = 0usize;
    let mut cur_phi = vec![0i64; width];
    let mut chosen = Vec::new();
    while cur_dim < n {
        let mut best: Option<(usize, SlopeValue)> = None;
        let mut tie: Option<usize> = None;
        for (idx, (dim, ph)) in values.iter().enumerate() {
            if *dim <= cur_dim {
                continue;
            }
            let s = SlopeValue::new(
                PhiValue {
                    exponents: ph.iter().zip(&cur_phi).map(|(a, b)| a - b).collect(),
                },
                (*dim - cur_dim) as u64,
            );
            let better = match &best {
                None => true,
                Some((bi, bs)) => match compare_slopes_in(bases, &s, bs).then(dim.cmp(&values[*bi].0)) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => {
                        tie = Some(idx);
                        false
                    }
                },
            };
            if better {
                best = Some((idx, s));
                tie = None;
            }
        }
        if let (Some((bi, _)), Some(other)) = (&best, tie) {
            return Err(Stop::Tie {
                step: chosen.len(),
                dim: values[*bi].0,
                a: *bi,
                b: other,
            });
        }
        let (bi, _) = best.ok_or(Stop::Exhausted { step: chosen.len() })?;
        cur_dim = values[bi].0;
        cur_phi = values[bi].1.clone();
        chosen.push(bi);
    }
    Ok(chosen)
}

/// Fills in φ, slopes and `𝔖_i` for a list of nested subgroups.
pub fn assemble_chain(model: &GroupModel, subgroups: Vec<Subgroup>) -> Result<Chain> {
    let nodes: Vec<ChainNode> = subgroups
        .into_iter()
        .map(|h| ChainNode {
            dim: h.dim(),
            phi: phi(model, &h),
            subgroup: h,
        })
        .collect();
    let mut chain = Chain {
        nodes,
        steps: Vec::new(),
    };
    for i in 0..chain.nodes.len() - 1 {
        let (a, b) = (&chain.nodes[i], &chain.nodes[i + 1]);
        let slope = SlopeValue::new(b.phi.sub(&a.phi), (b.dim - a.dim) as u64);
        let frak_s = frak_s(model, &chain, i)?;
        chain.steps.push(ChainStep { slope, frak_s });
    }
    Ok(chain)
}

/// `𝔖_i`, computed from the rank jumps of `(Γ_j ∩ H_{i+1}) / (Γ_j ∩ H_i)`
/// and checked against `exp(Δφ / Δdim)`.
pub fn frak_s(model: &GroupModel, chain: &Chain, i: usize) -> Result<RootedRational> {
    if i + 1 >= chain.nodes.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: chain.nodes.len().saturating_sub(1),
        });
    }
    let (lo, hi) = (&chain.nodes[i], &chain.nodes[i + 1]);
    let q_hi = prefix_ranks(hi.subgroup.lattice());
    let q_lo = prefix_ranks(lo.subgroup.lattice());
    let q: Vec<i64> = q_hi
        .iter()
        .zip(&q_lo)
        .map(|(a, b)| *a as i64 - *b as i64)
        .collect();
    let exps: Vec<i64> = q.windows(2).map(|w| w[1] - w[0]).collect();
    let radicand = power_product(model.scales(), &exps);
    let via_phi = hi.phi.sub(&lo.phi).exp(model.scales());
    if radicand != via_phi {
        return Err(Error::violation(
            "frak_s",
            i,
            format!("double-quotient radicand {radicand} differs from exp(Δφ) {via_phi}"),
        ));
    }
    Ok(RootedRational {
        radicand,
        root: (hi.dim - lo.dim) as u32,
    })
}

/// `μ`, `μ*` and the per-step `μ_i` from the equal-scale chain.
#[derive(Debug, Clone)]
pub struct MuReport {
    pub mu_star: BigRational,
    pub mu: BigRational,
    pub mu_list: Vec<BigRational>,
    pub well_distributed: bool,
    pub chain: Chain,
}

/// Builds the chain with every `S_j` equal (to 2; the chain does not depend
/// on the common value) and reads off the normalized slopes.
pub fn mu_exponents(model: &GroupModel) -> Result<MuReport> {
    let two = BigRational::from_integer(2.into());
    let equal = model.with_scales(vec![two; model.l()])?;
    let chain = build_chain(&equal)?;
    let mu_list: Vec<BigRational> = chain
        .steps
        .iter()
        .map(|s| {
            let total: i64 = s.slope.numerator.exponents.iter().sum();
            BigRational::new(total.into(), BigInt::from(s.slope.denominator))
        })
        .collect();
    let r = chain.r();
    let rk_gamma = *model.prefix_ranks().last().unwrap_or(&0) as i64;
    let h1 = &chain.nodes[1];
    let rk_h1 = equal.rank_profile(&h1.subgroup).gamma_ranks.last().copied().unwrap_or(0) as i64;
    let star_direct = BigRational::new(rk_h1.into(), (h1.dim as i64).into());
    let last = &chain.nodes[r - 1];
    let rk_last = equal
        .rank_profile(&last.subgroup)
        .gamma_ranks
        .last()
        .copied()
        .unwrap_or(0) as i64;
    let mu_direct = BigRational::new(
        (rk_gamma - rk_last).into(),
        ((model.n() - last.dim) as i64).into(),
    );
    if star_direct != mu_list[0] || mu_direct != mu_list[r - 1] {
        return Err(Error::violation(
            "mu",
            0,
            format!(
                "rank ratios ({star_direct}, {mu_direct}) differ from chain slopes ({}, {})",
                mu_list[0],
                mu_list[r - 1]
            ),
        ));
    }
    Ok(MuReport {
        mu_star: mu_list[0].clone(),
        mu: mu_list[r - 1].clone(),
        well_distributed: r == 1,
        mu_list,
        chain,
    })
}

/// `𝒩_{H',H''}(S) = ∏_j S_j^{e_j}` with `e_j` the rank jumps of
/// `(Γ_j ∩ H') / (Γ_j ∩ H'')`.
pub fn n_formula(model: &GroupModel, h_prime: &Subgroup, h_dprime: &Subgroup) -> Result<BigRational> {
    Ok(power_product(model.scales(), &n_exponents(model, h_prime, h_dprime)?))
}

pub fn n_exponents(model: &GroupModel, h_prime: &Subgroup, h_dprime: &Subgroup) -> Result<Vec<i64>> {
    check_nested(h_prime, h_dprime)?;
    let a = prefix_ranks(h_prime.lattice());
    let b = prefix_ranks(h_dprime.lattice());
    let q: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x as i64 - *y as i64).collect();
    debug_assert_eq!(q.len(), model.l() + 1);
    Ok(q.windows(2).map(|w| w[1] - w[0]).collect())
}

pub(crate) fn check_nested(outer: &Subgroup, inner: &Subgroup) -> Result<()> {
    if outer.lattice().contains_lattice(inner.lattice()) && outer.contains(inner) {
        Ok(())
    } else {
        Err(Error::NotNested(format!(
            "{inner:?} is not contained in {outer:?}"
        )))
    }
}

/// `φ_{S,T}(H)`: exponents over `log S_j` and over `log T_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiSt {
    pub s: PhiValue,
    pub t: Vec<i64>,
}

/// `e'_k = dim(W_k ∩ H) − dim(W_{k−1} ∩ H)` along the flag of row spans.
pub fn phi_st(
    model: &GroupModel,
    h: &Subgroup,
    w: &PolyMatrix,
    t_orders: &[BigRational],
) -> Result<PhiSt> {
    validate_flag(model, w, t_orders)?;
    let mut prev = 0i64;
    let mut t = Vec::with_capacity(w.rows());
    for k in 1..=w.rows() {
        let d = flag_intersection_dim(model.n(), w, k, h) as i64;
        t.push(d - prev);
        prev = d;
    }
    Ok(PhiSt {
        s: phi(model, h),
        t,
    })
}

fn validate_flag(model: &GroupModel, w: &PolyMatrix, t_orders: &[BigRational]) -> Result<()> {
    if w.cols() != model.n() {
        return Err(Error::DimensionMismatch(format!(
            "flag vectors have length {}, group dimension is {}",
            w.cols(),
            model.n()
        )));
    }
    if w.rows() != t_orders.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} flag vectors but {} orders",
            w.rows(),
            t_orders.len()
        )));
    }
    if t_orders.iter().any(|t| *t < BigRational::one()) || t_orders.windows(2).any(|p| p[0] < p[1]) {
        return Err(Error::ValidationError {
            field: "T".into(),
            message: "orders must satisfy T_1 ≥ … ≥ T_d ≥ 1".into(),
        });
    }
    Ok(())
}

fn flag_intersection_dim(n: usize, w: &PolyMatrix, k: usize, h: &Subgroup) -> usize {
    let wk = Matrix::from_fn(k, n, |r, c| w.get(r, c).clone());
    let dim_w = rank(&wk);
    let sum = wk.stack(h.basis());
    dim_w + h.dim() - rank(&sum)
}

/// Experimental: the greedy rule applied to `φ_{S,T}` over the prefix
/// closures. Not certified.
pub fn experimental_st_chain(
    model: &GroupModel,
    w: &PolyMatrix,
    t_orders: &[BigRational],
) -> Result<Vec<(Subgroup, PhiSt)>> {
    validate_flag(model, w, t_orders)?;
    let mut cands = candidates::prefix_candidates(model);
    cands.sort();
    cands.dedup();
    let mut bases = model.scales().to_vec();
    bases.extend(t_orders.iter().cloned());
    let mut vals = Vec::new();
    let mut values = Vec::new();
    for k in &cands {
        let p = phi_st(model, k, w, t_orders)?;
        let mut e = p.s.exponents.clone();
        e.extend(p.t.iter().copied());
        values.push((k.dim(), e));
        vals.push(p);
    }
    let order = greedy_indices(model.n(), &bases, &values)?;
    let mut out = vec![(model.zero_subgroup(), phi_st(model, &model.zero_subgroup(), w, t_orders)?)];
    out.extend(order.into_iter().map(|i| (cands[i].clone(), vals[i].clone())));
    Ok(out)
}
