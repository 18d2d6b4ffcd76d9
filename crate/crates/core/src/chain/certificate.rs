//! Exact certificate for a chain: convexity excess `χ(K)` over a candidate
//! set, equality cases, strict slope decrease, scaling invariance,
//! injectivity of `ψ` on the chain and the telescoping product.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;

use super::candidates::{
    constant_rows, dot, exhaustive_candidates, integer_normals, random_candidates, Candidate,
    EnumerationLimits, Origin, Repr,
};
use super::{build_chain, compare_slopes, Chain, PhiValue};
use crate::group::{GroupModel, Subgroup};
use crate::linalg::{pow, power_product};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Coefficient height of the exhaustive candidate set.
    pub height: u32,
    pub random_count: usize,
    pub seed: u64,
    pub limits: EnumerationLimits,
    /// Exponents `α` for the rescaling `S_j ↦ S_j^α`.
    pub alphas: Vec<u32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            height: 2,
            random_count: 0,
            seed: 0,
            limits: EnumerationLimits::default(),
            alphas: vec![2, 3],
        }
    }
}

/// One candidate with its excess `χ_i(K)` for every step `i`.
#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub dim: usize,
    pub phi: PhiValue,
    pub origin: Origin,
    pub chi: Vec<PhiValue>,
}

#[derive(Debug, Clone)]
pub struct EqualityWitness {
    pub step: usize,
    pub candidate: usize,
    pub dim: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingCheck {
    pub alpha: u32,
    pub same_subgroups: bool,
    pub radicands_powered: bool,
}

#[derive(Debug, Clone)]
pub struct ChainCertificate {
    pub candidates: Vec<CandidateRecord>,
    pub equality_witnesses: Vec<EqualityWitness>,
    pub scaling: Vec<ScalingCheck>,
    /// Candidates sharing `ψ` with some `H_i`; each was shown equal to it.
    pub psi_matches: usize,
    pub telescoping_lhs: BigRational,
    pub telescoping_rhs: BigRational,
}

/// Chain subgroups as integer bases and normals, for rational models.
struct IntView {
    basis: Vec<Vec<i128>>,
    normals: Vec<Vec<i128>>,
}

impl IntView {
    fn of(h: &Subgroup, n: usize) -> Option<Self> {
        let basis = constant_rows(h.basis().iter_rows().map(<[_]>::to_vec))?;
        let normals = if basis.is_empty() {
            (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
        } else {
            integer_normals(&basis, n)?
        };
        Some(IntView { basis, normals })
    }
}

fn inside(normals: &[Vec<i128>], vectors: &[Vec<i128>]) -> bool {
    vectors.iter().all(|v| normals.iter().all(|w| dot(w, v) == 0))
}

/// `outer ⊇ inner` where either side may be an integer flat.
struct Containment<'a> {
    model: &'a GroupModel,
    views: Option<Vec<IntView>>,
    chain: &'a Chain,
}

impl Containment<'_> {
    fn node_in_candidate(&self, i: usize, k: &Candidate) -> bool {
        match (&k.repr, &self.views) {
            (Repr::Flat(f), Some(v)) => inside(&f.normals, &v[i].basis),
            _ => k.to_subgroup(self.model).contains(&self.chain.nodes[i].subgroup),
        }
    }

    fn candidate_in_node(&self, i: usize, k: &Candidate) -> bool {
        match (&k.repr, &self.views) {
            (Repr::Flat(f), Some(v)) => inside(&v[i].normals, &f.basis),
            _ => self.chain.nodes[i].subgroup.contains(&k.to_subgroup(self.model)),
        }
    }
}

/// Checks the chain against the exhaustive and random candidates; the first
/// failed check is returned as a `CertificateViolation`.
pub fn verify_chain(model: &GroupModel, chain: &Chain, options: &VerifyOptions) -> Result<ChainCertificate> {
    let n = model.n();
    let scales = model.scales();
    check_shape(model, chain)?;

    let mut cands = exhaustive_candidates(model, options.height, options.limits)?;
    cands.extend(random_candidates(model, options.random_count, options.seed));
    let views = if model.is_rational() {
        chain
            .nodes
            .iter()
            .map(|node| IntView::of(&node.subgroup, n))
            .collect::<Option<Vec<_>>>()
    } else {
        None
    };
    let contain = Containment { model, views, chain };

    // χ_i(K) = Δd·φ(K) − Δφ·dim K + φ(H_{i+1})·dim H_i − φ(H_i)·dim H_{i+1}
    let r = chain.r();
    let mut records = Vec::with_capacity(cands.len());
    let mut witnesses = Vec::new();
    let mut sign_cache: HashMap<(usize, usize, PhiValue), Ordering> = HashMap::new();
    for (ci, k) in cands.iter().enumerate() {
        let mut chis = Vec::with_capacity(r);
        for i in 0..r {
            let (a, b) = (&chain.nodes[i], &chain.nodes[i + 1]);
            let dd = (b.dim - a.dim) as i64;
            let chi = k
                .phi
                .scale(dd)
                .sub(&b.phi.sub(&a.phi).scale(k.dim as i64))
                .add(&b.phi.scale(a.dim as i64))
                .sub(&a.phi.scale(b.dim as i64));
            let sign = *sign_cache
                .entry((i, k.dim, k.phi.clone()))
                .or_insert_with(|| chi.sign(scales));
            match sign {
                Ordering::Greater => {
                    return Err(Error::violation(
                        "chi",
                        i,
                        format!(
                            "candidate of dimension {} with φ exponents {:?} lies above the segment (χ exponents {:?}): {:?}",
                            k.dim,
                            k.phi.exponents,
                            chi.exponents,
                            k.to_subgroup(model)
                        ),
                    ))
                }
                Ordering::Equal => {
                    if !(contain.node_in_candidate(i, k) && contain.candidate_in_node(i + 1, k)) {
                        return Err(Error::violation(
                            "chi_equality",
                            i,
                            format!(
                                "candidate on the segment is not between H_{i} and H_{}: {:?}",
                                i + 1,
                                k.to_subgroup(model)
                            ),
                        ));
                    }
                    witnesses.push(EqualityWitness {
                        step: i,
                        candidate: ci,
                        dim: k.dim,
                    });
                }
                Ordering::Less => {}
            }
            chis.push(chi);
        }
        records.push(CandidateRecord {
            dim: k.dim,
            phi: k.phi.clone(),
            origin: k.origin,
            chi: chis,
        });
    }

    check_slopes(model, chain)?;

    // ψ(K) = ψ(H_i) must force K = H_i.
    let profiles: Vec<(usize, Vec<usize>)> = chain
        .nodes
        .iter()
        .map(|node| (node.dim, model.rank_profile(&node.subgroup).gamma_ranks))
        .collect();
    let mut psi_matches = 0;
    for k in &cands {
        for (i, (d, prof)) in profiles.iter().enumerate() {
            if k.dim == *d && k.profile == *prof {
                psi_matches += 1;
                if !contain.node_in_candidate(i, k) {
                    return Err(Error::violation(
                        "psi_injectivity",
                        i,
                        format!("distinct subgroup shares ψ with H_{i}: {:?}", k.to_subgroup(model)),
                    ));
                }
            }
        }
    }

    let mut scaling = Vec::new();
    for &alpha in &options.alphas {
        let powered: Vec<BigRational> = scales.iter().map(|s| pow(s, alpha as i64)).collect();
        let scaled = model.with_scales(powered)?;
        let other = build_chain(&scaled)?;
        let same = chain.same_subgroups(&other);
        let radicands_powered = same
            && chain
                .steps
                .iter()
                .zip(&other.steps)
                .all(|(a, b)| pow(&a.frak_s.radicand, alpha as i64) == b.frak_s.radicand);
        if !same || !radicands_powered {
            return Err(Error::violation(
                "scaling",
                0,
                format!("chain changes under S ↦ S^{alpha}"),
            ));
        }
        scaling.push(ScalingCheck {
            alpha,
            same_subgroups: same,
            radicands_powered,
        });
    }

    let lhs = chain
        .steps
        .iter()
        .fold(BigRational::one(), |acc, s| acc * &s.frak_s.radicand);
    let ranks = model.prefix_ranks();
    let exps: Vec<i64> = ranks.windows(2).map(|w| w[1] as i64 - w[0] as i64).collect();
    let rhs = power_product(scales, &exps);
    if lhs != rhs {
        return Err(Error::violation(
            "telescoping",
            r,
            format!("∏ radicands = {lhs} but ∏ S_j^(rank jumps) = {rhs}"),
        ));
    }

    Ok(ChainCertificate {
        candidates: records,
        equality_witnesses: witnesses,
        scaling,
        psi_matches,
        telescoping_lhs: lhs,
        telescoping_rhs: rhs,
    })
}

fn check_shape(model: &GroupModel, chain: &Chain) -> Result<()> {
    let nodes = &chain.nodes;
    if nodes.len() < 2 || chain.steps.len() + 1 != nodes.len() {
        return Err(Error::violation("shape", 0, "a chain needs at least two nodes"));
    }
    if nodes[0].subgroup != model.zero_subgroup() {
        return Err(Error::violation("shape", 0, "H_0 is not the zero subgroup"));
    }
    if nodes[nodes.len() - 1].dim != model.n() {
        return Err(Error::violation("shape", chain.r(), "H_r is not G"));
    }
    for i in 0..chain.r() {
        if nodes[i].dim >= nodes[i + 1].dim {
            return Err(Error::violation("shape", i, "dimensions must increase strictly"));
        }
    }
    Ok(())
}

/// `μ_0 > … > μ_{r−1}` and `1 ≤ 𝔖_{r−1} < … < 𝔖_0`.
fn check_slopes(model: &GroupModel, chain: &Chain) -> Result<()> {
    for i in 1..chain.r() {
        if compare_slopes(model, &chain.steps[i - 1].slope, &chain.steps[i].slope) != Ordering::Greater {
            return Err(Error::violation("slope_decrease", i, "slopes do not decrease strictly"));
        }
        if chain.steps[i - 1].frak_s <= chain.steps[i].frak_s {
            return Err(Error::violation("frak_s_order", i, "𝔖 values do not decrease strictly"));
        }
    }
    if let Some(last) = chain.steps.last() {
        if last.frak_s.radicand < BigRational::one() {
            return Err(Error::violation("frak_s_order", chain.r() - 1, "last 𝔖 is below 1"));
        }
    }
    Ok(())
}
