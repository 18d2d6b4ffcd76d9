//! Box images `Γ(λS) = {Σ n_j γ_j : |n_j| < λ S_j}`, coset counts modulo
//! pairs of subgroups, sum and difference sets, and empirical checks of the
//! counting and distribution estimates.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::candidates::exhaustive_candidates;
use crate::chain::{build_chain, check_nested, n_exponents, Chain, RootedRational};
use crate::group::{GroupModel, Point, Subgroup};
use crate::linalg::rational::approx;
use crate::linalg::pow;
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_MAX: u128 = 10_000_000;

/// `Γ(λS)` as distinct group points, each with one coefficient vector.
#[derive(Debug, Clone)]
pub struct GammaSet {
    pub points: Vec<Point>,
    pub witnesses: Vec<Vec<BigInt>>,
    pub scale_used: Vec<BigRational>,
    pub lambda: BigRational,
}

impl GammaSet {
    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// A finite set of group points with coefficient witnesses.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub witnesses: Vec<Vec<BigInt>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Sumset,
    Diffset,
}

/// Largest admissible `|n_j|`: `⌈λ S_j⌉ − 1`.
pub fn box_bounds(model: &GroupModel, lambda: &BigRational) -> Result<Vec<i64>> {
    if !lambda.is_positive() {
        return Err(Error::ValidationError {
            field: "lambda".into(),
            message: "must be positive".into(),
        });
    }
    model
        .scales()
        .iter()
        .map(|s| {
            let c: BigInt = (lambda * s).ceil().to_integer() - 1;
            c.to_i64().ok_or(Error::EnumerationTooLarge {
                requested: u128::MAX,
                limit: DEFAULT_ENUMERATION_MAX,
            })
        })
        .collect()
}

fn box_size(bounds: &[i64]) -> u128 {
    bounds
        .iter()
        .try_fold(1u128, |acc, &b| acc.checked_mul(2 * b.max(0) as u128 + 1))
        .unwrap_or(u128::MAX)
}

/// Canonical coefficient vectors of the distinct points of `Γ(λS)`, in
/// order of first appearance in the lexicographic box walk.
pub fn gamma_witnesses(model: &GroupModel, lambda: &BigRational, limit: u128) -> Result<Vec<Vec<BigInt>>> {
    let bounds = box_bounds(model, lambda)?;
    let requested = box_size(&bounds);
    if requested > limit {
        return Err(Error::EnumerationTooLarge { requested, limit });
    }
    let kernel = model.kernel_lattice();
    let trivial_kernel = kernel.rank() == 0;
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    let mut out = Vec::new();
    let mut v: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        if trivial_kernel {
            out.push(big);
        } else {
            let rep = kernel.reduce(&big);
            if seen.insert(rep) {
                out.push(big);
            }
        }
        // Odometer step, last coordinate fastest.
        let mut k = v.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if v[k] < bounds[k] {
                v[k] += 1;
                break;
            }
            v[k] = -bounds[k];
        }
    }
}

/// `Γ(λS)` with `|n_j| < λ S_j`, deduplicated as group points.
pub fn enumerate_gamma(model: &GroupModel, lambda: &BigRational, limit: u128) -> Result<GammaSet> {
    let witnesses = gamma_witnesses(model, lambda, limit)?;
    Ok(GammaSet {
        points: witnesses.iter().map(|w| model.iota_point(w)).collect(),
        witnesses,
        scale_used: model.scales().iter().map(|s| lambda * s).collect(),
        lambda: lambda.clone(),
    })
}

/// `Card(Ω ∩ H' mod H'')`.
pub fn card_mod(omega: &GammaSet, h_prime: &Subgroup, h_dprime: &Subgroup) -> Result<usize> {
    card_mod_witnesses(&omega.witnesses, h_prime, h_dprime)
}

pub fn card_mod_witnesses(witnesses: &[Vec<BigInt>], h_prime: &Subgroup, h_dprime: &Subgroup) -> Result<usize> {
    check_nested(h_prime, h_dprime)?;
    let outer = h_prime.lattice();
    let inner = h_dprime.lattice();
    let classes: HashSet<Vec<BigInt>> = witnesses
        .iter()
        .filter(|w| outer.contains(w))
        .map(|w| inner.reduce(w))
        .collect();
    Ok(classes.len())
}

/// `Ω[k]` (sums of exactly `k` elements) or `Ω{k} = Ω[k] − Ω[k]`.
pub fn combine(
    model: &GroupModel,
    omega: &GammaSet,
    k: usize,
    mode: CombineMode,
    limit: u128,
) -> Result<PointSet> {
    let kernel = model.kernel_lattice();
    let l = model.l();
    let base: Vec<Vec<BigInt>> = omega.witnesses.iter().map(|w| kernel.reduce(w)).collect();
    let mut current: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    current.insert(vec![BigInt::zero(); l]);
    for _ in 0..k {
        guard(current.len(), base.len(), limit)?;
        let mut next = BTreeSet::new();
        for a in &current {
            for b in &base {
                let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                next.insert(kernel.reduce(&s));
            }
        }
        current = next;
    }
    if mode == CombineMode::Diffset {
        guard(current.len(), current.len(), limit)?;
        let mut next = BTreeSet::new();
        for a in &current {
            for b in &current {
                let s: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                next.insert(kernel.reduce(&s));
            }
        }
        current = next;
    }
    let witnesses: Vec<Vec<BigInt>> = current.into_iter().collect();
    Ok(PointSet {
        points: witnesses.iter().map(|w| model.iota_point(w)).collect(),
        witnesses,
    })
}

fn guard(a: usize, b: usize, limit: u128) -> Result<()> {
    let requested = a as u128 * b as u128;
    if requested > limit {
        return Err(Error::EnumerationTooLarge { requested, limit });
    }
    Ok(())
}

/// One `λ` of a counting sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub lambda: BigRational,
    pub count: usize,
    /// `λ^rk 𝒩_{H',H''}(S)`.
    pub predicted: BigRational,
    pub ratio: BigRational,
}

#[derive(Debug, Clone)]
pub struct CountReport {
    /// Exponents of `𝒩` over `S_1..S_l`.
    pub exponents: Vec<i64>,
    /// `rk((Γ ∩ H') / (Γ ∩ H''))`.
    pub rank: i64,
    pub raw_count: usize,
    pub n_formula_value: BigRational,
    pub ratio: BigRational,
    pub sweep: Vec<SweepPoint>,
    pub ratio_min: BigRational,
    pub ratio_max: BigRational,
    /// Least-squares slope of `log count` against `log λ` (display only).
    pub fitted_exponent: Option<f64>,
    /// Whether the rounded fit equals `rank`; `None` with fewer than two
    /// distinct `λ`.
    pub exponent_matches: Option<bool>,
}

/// Counts `Γ(λS) ∩ H' mod H''` for each `λ` and compares with `λ^rk 𝒩`.
pub fn counting_check(
    model: &GroupModel,
    h_prime: &Subgroup,
    h_dprime: &Subgroup,
    lambdas: &[BigRational],
    limit: u128,
) -> Result<CountReport> {
    let exponents = n_exponents(model, h_prime, h_dprime)?;
    let rank: i64 = exponents.iter().sum();
    let n_value = crate::linalg::power_product(model.scales(), &exponents);
    let one = BigRational::one();
    let raw_count = card_mod_witnesses(&gamma_witnesses(model, &one, limit)?, h_prime, h_dprime)?;
    let ratio = BigRational::from_integer(raw_count.into()) / &n_value;
    let mut sweep = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let count = card_mod_witnesses(&gamma_witnesses(model, lambda, limit)?, h_prime, h_dprime)?;
        let predicted = pow(lambda, rank) * &n_value;
        sweep.push(SweepPoint {
            lambda: lambda.clone(),
            count,
            ratio: BigRational::from_integer(count.into()) / &predicted,
            predicted,
        });
    }
    let ratios = sweep.iter().map(|p| &p.ratio).chain([&ratio]);
    let ratio_min = ratios.clone().min().cloned().expect("nonempty");
    let ratio_max = ratios.max().cloned().expect("nonempty");
    let fitted_exponent = fit_exponent(&sweep);
    Ok(CountReport {
        exponents,
        rank,
        raw_count,
        n_formula_value: n_value,
        ratio,
        exponent_matches: fitted_exponent.map(|f| f.round() as i64 == rank),
        fitted_exponent,
        sweep,
        ratio_min,
        ratio_max,
    })
}

fn fit_exponent(sweep: &[SweepPoint]) -> Option<f64> {
    let distinct: BTreeSet<&BigRational> = sweep.iter().map(|p| &p.lambda).collect();
    if distinct.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = sweep
        .iter()
        .map(|p| (approx(&p.lambda).ln(), (p.count as f64).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// `Card(Γ(S) ∩ (x + H'))` for sampled `x ∈ Γ(S)` against
/// `Card(Γ(2S) ∩ H')`.
#[derive(Debug, Clone)]
pub struct TranslationReport {
    pub bound: usize,
    pub samples: Vec<(Vec<BigInt>, usize)>,
    pub holds: bool,
}

pub fn translation_check(
    model: &GroupModel,
    h_prime: &Subgroup,
    samples: usize,
    seed: u64,
    limit: u128,
) -> Result<TranslationReport> {
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let omega = gamma_witnesses(model, &one, limit)?;
    let bound = card_mod_witnesses(&gamma_witnesses(model, &two, limit)?, h_prime, &model.zero_subgroup())?;
    let mut order: Vec<usize> = (0..omega.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(samples);
    order.sort_unstable();
    let lattice = h_prime.lattice();
    let rows: Vec<(Vec<BigInt>, usize)> = order
        .into_iter()
        .map(|i| {
            let x = &omega[i];
            let count = omega
                .iter()
                .filter(|w| {
                    let d: Vec<BigInt> = w.iter().zip(x).map(|(a, b)| a - b).collect();
                    lattice.contains(&d)
                })
                .count();
            (x.clone(), count)
        })
        .collect();
    Ok(TranslationReport {
        bound,
        holds: rows.iter().all(|(_, c)| *c <= bound),
        samples: rows,
    })
}

/// Options for [`distribution_checks`].
#[derive(Debug, Clone)]
pub struct DistributionOptions {
    /// Height of the exhaustive candidate set.
    pub height: u32,
    /// Exponents `α` of the sweep `S ↦ S^α`.
    pub alphas: Vec<u32>,
    /// Largest allowed spread `max/min` of a ratio across the sweep.
    pub bracket: BigRational,
    pub limit: u128,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        DistributionOptions {
            height: 2,
            alphas: vec![1, 2],
            bracket: BigRational::from_integer(16.into()),
            limit: DEFAULT_ENUMERATION_MAX,
        }
    }
}

/// A count compared with a power of `𝔖`, as `(count / 𝔖^d)` kept exact.
#[derive(Debug, Clone)]
pub struct RatioEntry {
    pub dim: usize,
    pub count: usize,
    /// `count / 𝔖^d` as a rooted rational.
    pub ratio: RootedRational,
}

/// One step `i` of one side at one `α`.
#[derive(Debug, Clone)]
pub struct StepRatios {
    pub step: usize,
    /// The chain neighbour (`H_{i+1}` or `H_{i−1}`), where the estimate is
    /// an equivalence.
    pub reference: RatioEntry,
    /// Non-chain candidates on this side.
    pub candidates: Vec<RatioEntry>,
    /// Max (upper side) or min (lower side) over `reference` and
    /// `candidates`.
    pub extreme: RootedRational,
}

#[derive(Debug, Clone)]
pub struct AlphaReport {
    pub alpha: u32,
    /// `Card(Γ(cS) ∩ H mod H_i) / 𝔖_i^{dim(H/H_i)}` for `H_i ⊊ H`.
    pub upper: Vec<StepRatios>,
    /// `Card(Γ(ε S / dim H_i) ∩ H_i mod H) / 𝔖_{i−1}^{dim(H_i/H)}` for `H ⊊ H_i`.
    pub lower: Vec<StepRatios>,
}

#[derive(Debug, Clone)]
pub struct DistributionReport {
    pub scale_factor: u64,
    pub epsilon: BigRational,
    pub alphas: Vec<AlphaReport>,
    /// Every lower extreme is positive.
    pub lower_positive: bool,
    /// Every per-step extreme stays within the bracket across the sweep.
    pub bounded: bool,
}

/// Ratios of coset counts to powers of `𝔖` on both sides of every chain
/// step, at `S` and at `S^α`.
pub fn distribution_checks(
    model: &GroupModel,
    chain: &Chain,
    epsilon: &BigRational,
    scale_factor: u64,
    options: &DistributionOptions,
) -> Result<DistributionReport> {
    if !epsilon.is_positive() || epsilon >= &BigRational::one() {
        return Err(Error::ValidationError {
            field: "epsilon".into(),
            message: "must lie in (0, 1)".into(),
        });
    }
    let candidates: BTreeSet<Subgroup> = exhaustive_candidates(
        model,
        options.height,
        crate::chain::candidates::EnumerationLimits::default(),
    )?
    .iter()
    .map(|c| c.to_subgroup(model))
    .collect();
    let nodes: Vec<&Subgroup> = chain.subgroups().collect();
    let others: Vec<&Subgroup> = candidates.iter().filter(|k| !nodes.contains(k)).collect();
    let mut alphas = Vec::new();
    for &alpha in &options.alphas {
        let scaled: Vec<BigRational> = model.scales().iter().map(|s| pow(s, alpha as i64)).collect();
        let m = model.with_scales(scaled)?;
        let ch = build_chain(&m)?;
        if !ch.same_subgroups(chain) {
            return Err(Error::violation("scaling", 0, format!("chain changes under S -> S^{alpha}")));
        }
        let up_witnesses = gamma_witnesses(&m, &BigRational::from_integer(scale_factor.into()), options.limit)?;
        let mut upper = Vec::new();
        for i in 0..ch.r() {
            let hi = &ch.nodes[i].subgroup;
            let step = &ch.steps[i].frak_s;
            let entry = |h: &Subgroup| -> Result<RatioEntry> {
                let count = card_mod_witnesses(&up_witnesses, h, hi)?;
                let d = h.dim() - hi.dim();
                Ok(RatioEntry {
                    dim: h.dim(),
                    count,
                    ratio: count_over_power(count, step, d),
                })
            };
            let reference = entry(&ch.nodes[i + 1].subgroup)?;
            let cands = others
                .iter()
                .filter(|h| h.dim() > hi.dim() && h.contains(hi) && h.lattice().contains_lattice(hi.lattice()))
                .map(|h| entry(h))
                .collect::<Result<Vec<_>>>()?;
            let extreme = cands.iter().map(|e| &e.ratio).chain([&reference.ratio]).max().cloned().expect("nonempty");
            upper.push(StepRatios {
                step: i,
                reference,
                candidates: cands,
                extreme,
            });
        }
        let mut lower = Vec::new();
        for i in 1..=ch.r() {
            let hi = &ch.nodes[i].subgroup;
            let step = &ch.steps[i - 1].frak_s;
            let lambda = epsilon / BigRational::from_integer(hi.dim().into());
            let witnesses = gamma_witnesses(&m, &lambda, options.limit)?;
            let entry = |h: &Subgroup| -> Result<RatioEntry> {
                let count = card_mod_witnesses(&witnesses, hi, h)?;
                let d = hi.dim() - h.dim();
                Ok(RatioEntry {
                    dim: h.dim(),
                    count,
                    ratio: count_over_power(count, step, d),
                })
            };
            let reference = entry(&ch.nodes[i - 1].subgroup)?;
            let cands = others
                .iter()
                .filter(|h| h.dim() < hi.dim() && hi.contains(h) && hi.lattice().contains_lattice(h.lattice()))
                .map(|h| entry(h))
                .collect::<Result<Vec<_>>>()?;
            let extreme = cands.iter().map(|e| &e.ratio).chain([&reference.ratio]).min().cloned().expect("nonempty");
            lower.push(StepRatios {
                step: i,
                reference,
                candidates: cands,
                extreme,
            });
        }
        alphas.push(AlphaReport { alpha, upper, lower });
    }
    let lower_positive = alphas
        .iter()
        .flat_map(|a| &a.lower)
        .all(|s| s.extreme.radicand.is_positive());
    let bounded = spread_ok(&alphas, |a| &a.upper, &options.bracket) && spread_ok(&alphas, |a| &a.lower, &options.bracket);
    Ok(DistributionReport {
        scale_factor,
        epsilon: epsilon.clone(),
        alphas,
        lower_positive,
        bounded,
    })
}

/// `count / (radicand^(1/root))^d` as `(count^root / radicand^d)^(1/root)`.
fn count_over_power(count: usize, frak_s: &RootedRational, d: usize) -> RootedRational {
    let c = BigRational::from_integer(count.into());
    RootedRational {
        radicand: num_traits::pow(c, frak_s.root as usize) / num_traits::pow(frak_s.radicand.clone(), d),
        root: frak_s.root,
    }
}

/// `a / b ≤ bound` for rooted rationals, by cross powers.
fn ratio_at_most(a: &RootedRational, b: &RootedRational, bound: &BigRational) -> bool {
    let (p, q) = (a.root as usize, b.root as usize);
    let lhs = num_traits::pow(a.radicand.clone(), q);
    let rhs = num_traits::pow(bound.clone(), p * q) * num_traits::pow(b.radicand.clone(), p);
    lhs <= rhs
}

fn spread_ok(
    alphas: &[AlphaReport],
    side: impl Fn(&AlphaReport) -> &Vec<StepRatios>,
    bracket: &BigRational,
) -> bool {
    let mut by_step: HashMap<usize, Vec<&RootedRational>> = HashMap::new();
    for a in alphas {
        for s in side(a) {
            by_step.entry(s.step).or_default().push(&s.extreme);
        }
    }
    by_step.values().all(|v| {
        let hi = v.iter().max().expect("nonempty");
        let lo = v.iter().min().expect("nonempty");
        lo.radicand.is_positive() && ratio_at_most(hi, lo, bracket)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rational::rat;
    use crate::linalg::PolyScalar;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn planar(s: &[i64]) -> GroupModel {
        GroupModel::rational(2, &[&[1, 0], &[0, 1]], s).unwrap()
    }

    fn line(m: &GroupModel, v: &[i64]) -> Subgroup {
        let row: Vec<PolyScalar> = v.iter().map(|&x| PolyScalar::constant(rat(x))).collect();
        m.subgroup_spanned_by(&[row]).unwrap()
    }

    /// Brute-force oracle: distinct rational images of the box.
    fn oracle_points(gens: &[&[i64]], bounds: &[i64]) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(0usize, vec![0i64; gens[0].len()])];
        while let Some((j, acc)) = stack.pop() {
            if j == gens.len() {
                out.insert(acc);
                continue;
            }
            for c in -bounds[j]..=bounds[j] {
                let next = acc.iter().zip(gens[j]).map(|(a, g)| a + c * g).collect();
                stack.push((j + 1, next));
            }
        }
        out
    }

    fn coords(set: &GammaSet) -> BTreeSet<Vec<BigRational>> {
        set.points.iter().map(|p| p.as_rational().unwrap()).collect()
    }

    fn as_rat(set: BTreeSet<Vec<i64>>) -> BTreeSet<Vec<BigRational>> {
        set.into_iter().map(|v| v.into_iter().map(rat).collect()).collect()
    }

    #[test]
    fn single_generator_box() {
        let m = GroupModel::rational(1, &[&[1]], &[3]).unwrap();
        let g = enumerate_gamma(&m, &rat(1), DEFAULT_ENUMERATION_MAX).unwrap();
        let xs: Vec<BigRational> = g.points.iter().map(|p| p.as_rational().unwrap()[0].clone()).collect();
        assert_eq!(xs, (-2..=2).map(rat).collect::<Vec<_>>());
    }

    #[test]
    fn dependent_generators_collapse() {
        let m = GroupModel::rational(1, &[&[1], &[2]], &[2, 2]).unwrap();
        let g = enumerate_gamma(&m, &rat(1), DEFAULT_ENUMERATION_MAX).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(coords(&g), as_rat(oracle_points(&[&[1], &[2]], &[1, 1])));
    }

    #[test]
    fn half_lambda() {
        let m = GroupModel::rational(1, &[&[1]], &[3]).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let g = enumerate_gamma(&m, &half, DEFAULT_ENUMERATION_MAX).unwrap();
        assert_eq!(coords(&g), as_rat(oracle_points(&[&[1]], &[1])));
    }

    #[test]
    fn non_integer_scale_boundary() {
        let m = GroupModel::new(
            1,
            vec![],
            vec![Point::rational(vec![rat(1)])],
            vec![BigRational::new(5.into(), 2.into())],
        )
        .unwrap();
        assert_eq!(box_bounds(&m, &rat(1)).unwrap(), vec![2]);
        let m = GroupModel::rational(1, &[&[1]], &[3]).unwrap();
        assert_eq!(box_bounds(&m, &rat(1)).unwrap(), vec![2]);
    }

    #[test]
    fn enumeration_guard() {
        let m = GroupModel::rational(1, &[&[1], &[1]], &[100, 100]).unwrap();
        assert!(matches!(
            enumerate_gamma(&m, &rat(1), 1000),
            Err(Error::EnumerationTooLarge { requested: 39601, .. })
        ));
    }

    #[test]
    fn card_mod_examples() {
        let m = planar(&[3, 2]);
        let g = enumerate_gamma(&m, &rat(1), DEFAULT_ENUMERATION_MAX).unwrap();
        let full = m.full_subgroup();
        let zero = m.zero_subgroup();
        assert_eq!(card_mod(&g, &full, &zero).unwrap(), g.len());
        // Oracle: points (a, b), |a| < 3, |b| < 2 with a == b.
        let diag_oracle = (-2..=2).flat_map(|a| (-1..=1).map(move |b| (a, b))).filter(|(a, b)| a == b).count();
        assert_eq!(card_mod(&g, &line(&m, &[1, 1]), &zero).unwrap(), diag_oracle);
        // Oracle: distinct second coordinates.
        let rows: BTreeSet<i64> = (-1..=1).collect();
        assert_eq!(card_mod(&g, &full, &line(&m, &[1, 0])).unwrap(), rows.len());
        assert!(matches!(
            card_mod(&g, &zero, &full),
            Err(Error::NotNested(_))
        ));
    }

    #[test]
    fn combine_examples() {
        let m = GroupModel::rational(1, &[&[1]], &[1]).unwrap();
        let zero = enumerate_gamma(&m, &rat(1), 100).unwrap();
        for mode in [CombineMode::Sumset, CombineMode::Diffset] {
            let c = combine(&m, &zero, 3, mode, 100).unwrap();
            assert_eq!(c.points, vec![Point::rational(vec![rat(0)])]);
        }
        // Ω = {0, 1} via γ = (1), witnesses {0, 1}.
        let omega = GammaSet {
            points: vec![Point::rational(vec![rat(0)]), Point::rational(vec![rat(1)])],
            witnesses: vec![big(&[0]), big(&[1])],
            scale_used: vec![rat(1)],
            lambda: rat(1),
        };
        let xs = |p: &PointSet| -> Vec<BigRational> { p.points.iter().map(|q| q.as_rational().unwrap()[0].clone()).collect() };
        let sum = combine(&m, &omega, 2, CombineMode::Sumset, 100).unwrap();
        assert_eq!(xs(&sum), (0..=2).map(rat).collect::<Vec<_>>());
        let diff = combine(&m, &omega, 2, CombineMode::Diffset, 100).unwrap();
        assert_eq!(xs(&diff), (-2..=2).map(rat).collect::<Vec<_>>());
    }

    #[test]
    fn sumset_inside_larger_box() {
        let m = GroupModel::rational(1, &[&[1]], &[2]).unwrap();
        let omega = enumerate_gamma(&m, &rat(1), 100).unwrap();
        let sum = combine(&m, &omega, 2, CombineMode::Sumset, 100).unwrap();
        let bigger = GroupModel::rational(1, &[&[1]], &[3]).unwrap();
        let target = coords(&enumerate_gamma(&bigger, &rat(1), 100).unwrap());
        assert!(sum.points.iter().all(|p| target.contains(&p.as_rational().unwrap())));
    }

    #[test]
    fn combine_guard() {
        let m = GroupModel::rational(1, &[&[1]], &[10]).unwrap();
        let omega = enumerate_gamma(&m, &rat(1), 100).unwrap();
        assert!(matches!(
            combine(&m, &omega, 2, CombineMode::Sumset, 50),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn full_count_at_100_10() {
        let m = planar(&[100, 10]);
        let rep = counting_check(&m, &m.full_subgroup(), &m.zero_subgroup(), &[rat(1), rat(2), rat(4)], DEFAULT_ENUMERATION_MAX)
            .unwrap();
        // Closed-form box counts (2λS_1 − 1)(2λS_2 − 1).
        assert_eq!(rep.raw_count, 199 * 19);
        assert_eq!(rep.n_formula_value, rat(1000));
        assert_eq!(rep.ratio, BigRational::new(3781.into(), 1000.into()));
        let counts: Vec<usize> = rep.sweep.iter().map(|p| p.count).collect();
        assert_eq!(counts, vec![199 * 19, 399 * 39, 799 * 79]);
        assert_eq!(rep.rank, 2);
        assert_eq!(rep.exponent_matches, Some(true));
    }

    #[test]
    fn diagonal_count_ratio() {
        for (s1, s2) in [(7, 3), (20, 5), (9, 9)] {
            let m = planar(&[s1, s2]);
            let rep = counting_check(&m, &line(&m, &[1, 1]), &m.zero_subgroup(), &[rat(1)], DEFAULT_ENUMERATION_MAX).unwrap();
            assert_eq!(rep.raw_count as i64, 2 * s2 - 1);
            assert_eq!(rep.n_formula_value, rat(s2));
            assert!(rep.ratio > rat(1) && rep.ratio <= rat(2));
            assert_eq!(rep.exponent_matches, None);
        }
    }

    #[test]
    fn translation_bound_holds() {
        let m = planar(&[5, 3]);
        let rep = translation_check(&m, &line(&m, &[1, 1]), 10, 7, DEFAULT_ENUMERATION_MAX).unwrap();
        assert_eq!(rep.samples.len(), 10);
        assert!(rep.holds);
    }

    #[test]
    fn counts_grow_with_lambda() {
        let m = GroupModel::rational(2, &[&[1, 2], &[2, 1], &[1, 1]], &[4, 3, 2]).unwrap();
        let mut prev: Option<BTreeSet<Vec<BigRational>>> = None;
        for k in 1..=4 {
            let g = coords(&enumerate_gamma(&m, &BigRational::new(k.into(), 2.into()), DEFAULT_ENUMERATION_MAX).unwrap());
            if let Some(p) = prev {
                assert!(p.is_subset(&g));
            }
            prev = Some(g);
        }
    }

    #[test]
    fn distribution_upper_side_at_9_3() {
        let m = planar(&[9, 3]);
        let chain = build_chain(&m).unwrap();
        let rep = distribution_checks(&m, &chain, &BigRational::new(1.into(), 2.into()), 4, &DistributionOptions::default())
            .unwrap();
        // i = 1, H = G: classes of the second coordinate with |n_2| < 4·3^α.
        let a1 = &rep.alphas[0].upper[1].reference;
        let a2 = &rep.alphas[1].upper[1].reference;
        assert_eq!((a1.count, a2.count), (23, 71));
        assert_eq!(a1.ratio.radicand, BigRational::new(23.into(), 3.into()));
        assert_eq!(a2.ratio.radicand, BigRational::new(71.into(), 9.into()));
        // i = 1, H = 0 on the lower side: |n_1| < 9^α/2 on the x-axis.
        let l1 = &rep.alphas[0].lower[0].reference;
        let l2 = &rep.alphas[1].lower[0].reference;
        assert_eq!((l1.count, l2.count), (9, 81));
        assert!(rep.lower_positive);
        assert!(rep.bounded);
    }

    #[test]
    fn distribution_on_a_line_has_no_candidates() {
        let m = GroupModel::rational(1, &[&[1]], &[5]).unwrap();
        let chain = build_chain(&m).unwrap();
        let rep = distribution_checks(&m, &chain, &BigRational::new(1.into(), 2.into()), 2, &DistributionOptions::default())
            .unwrap();
        for a in &rep.alphas {
            assert!(a.upper.iter().chain(&a.lower).all(|s| s.candidates.is_empty()));
        }
    }

    #[test]
    fn epsilon_must_be_in_open_interval() {
        let m = planar(&[3, 2]);
        let chain = build_chain(&m).unwrap();
        assert!(matches!(
            distribution_checks(&m, &chain, &rat(1), 4, &DistributionOptions::default()),
            Err(Error::ValidationError { .. })
        ));
    }

    #[test]
    fn kernel_dedup_uses_lattice() {
        let m = GroupModel::rational(1, &[&[2], &[3]], &[3, 2]).unwrap();
        let g = enumerate_gamma(&m, &rat(1), 1000).unwrap();
        assert_eq!(coords(&g), as_rat(oracle_points(&[&[2], &[3]], &[2, 1])));
        let reps: BTreeSet<Vec<BigInt>> = g.witnesses.iter().map(|w| m.kernel_lattice().reduce(w)).collect();
        assert_eq!(reps.len(), g.len());
    }
}
