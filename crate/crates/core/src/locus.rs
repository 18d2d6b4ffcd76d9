//! Jet evaluation of polynomials of degree `≤ D` on `G_a^n` at finite point
//! sets, kernels of the evaluation map, and sampled membership in their
//! common zero locus `𝓑`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{Chain, RootedRational};
use crate::gamma::{enumerate_gamma, DEFAULT_ENUMERATION_MAX};
use crate::group::{GroupModel, Point, Subgroup};
use crate::linalg::rational::approx;
use crate::linalg::{nullspace, rref, Matrix, RatMatrix};
use crate::{Error, Result};

pub const DEFAULT_MATRIX_MAX: u128 = 4_000_000;

/// Exponent vectors `α` with `|α| ≤ D`, by degree and then
/// lexicographically descending (`x_1` first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub n: usize,
    pub d: u32,
    pub exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(n: usize, d: u32) -> Self {
        let mut exponents = Vec::new();
        for deg in 0..=d {
            compositions(n, deg, &mut Vec::with_capacity(n), &mut exponents);
        }
        MonomialBasis { n, d, exponents }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn index(&self) -> HashMap<&[u32], usize> {
        self.exponents.iter().enumerate().map(|(i, a)| (a.as_slice(), i)).collect()
    }

    /// `Σ c_α x^α` at `x`.
    pub fn evaluate(&self, coeffs: &[BigRational], x: &[BigRational]) -> BigRational {
        let powers = powers(x, self.d);
        self.exponents
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| monomial_value(&powers, a) * c)
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    /// Human-readable polynomial, e.g. `x1^3 - x1`.
    pub fn format(&self, coeffs: &[BigRational]) -> String {
        let mut terms = Vec::new();
        for (a, c) in self.exponents.iter().zip(coeffs).rev() {
            if c.is_zero() {
                continue;
            }
            let mono: Vec<String> = a
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| if e == 1 { format!("x{}", k + 1) } else { format!("x{}^{e}", k + 1) })
                .collect();
            let mag = crate::linalg::format_rational(&c.abs());
            let body = match (mono.is_empty(), c.abs().is_one()) {
                (true, _) => mag,
                (false, true) => mono.join("*"),
                (false, false) => format!("{mag}*{}", mono.join("*")),
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            terms.push((sign, body));
        }
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (sign, body)) in terms.iter().enumerate() {
            match (k, *sign) {
                (0, "-") => out.push('-'),
                (0, _) => {}
                (_, s) => out.push_str(&format!(" {s} ")),
            }
            out.push_str(body);
        }
        out
    }
}

fn compositions(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(deg);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if n == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for first in (0..=deg).rev() {
        prefix.push(first);
        compositions(n, deg - first, prefix, out);
        prefix.pop();
    }
}

fn powers(x: &[BigRational], d: u32) -> Vec<Vec<BigRational>> {
    x.iter()
        .map(|xi| {
            let mut p = Vec::with_capacity(d as usize + 1);
            let mut acc = BigRational::one();
            for _ in 0..=d {
                p.push(acc.clone());
                acc *= xi;
            }
            p
        })
        .collect()
}

fn monomial_value(powers: &[Vec<BigRational>], a: &[u32]) -> BigRational {
    a.iter()
        .zip(powers)
        .filter(|(&e, _)| e > 0)
        .fold(BigRational::one(), |acc, (&e, p)| acc * &p[e as usize])
}

/// Rows `(ω, σ)` with `|σ| < T`; entry `binom(α, σ) ω^{α−σ}`.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    pub matrix: RatMatrix,
    /// Point index and `σ` of each row.
    pub rows: Vec<(usize, Vec<u32>)>,
    pub basis: MonomialBasis,
}

fn rational_points(model: &GroupModel, omega: &[Point]) -> Result<Vec<Vec<BigRational>>> {
    if !model.is_rational() {
        return Err(Error::SymbolicModelNotSpecialized);
    }
    omega
        .iter()
        .map(|p| {
            if p.coords.len() != model.n() {
                return Err(Error::DimensionMismatch(format!(
                    "point has {} coordinates, expected {}",
                    p.coords.len(),
                    model.n()
                )));
            }
            p.as_rational().ok_or(Error::SymbolicModelNotSpecialized)
        })
        .collect()
}

fn check_size(n: usize, points: usize, t: u32, d: u32, limit: u128) -> Result<()> {
    if t == 0 {
        return Err(Error::ValidationError {
            field: "T".into(),
            message: "must be at least 1".into(),
        });
    }
    let cols: BigInt = binomial(BigInt::from(n as u64 + d as u64), BigInt::from(n));
    let jets: BigInt = binomial(BigInt::from(n as u64 + t as u64 - 1), BigInt::from(n));
    let requested = cols * jets * BigInt::from(points);
    let limit_big = BigInt::from(limit);
    if requested > limit_big {
        return Err(Error::MatrixTooLarge {
            requested: u128::try_from(requested).unwrap_or(u128::MAX),
            limit,
        });
    }
    Ok(())
}

pub fn jet_matrix(model: &GroupModel, omega: &[Point], t: u32, d: u32, limit: u128) -> Result<JetMatrix> {
    let pts = rational_points(model, omega)?;
    jet_matrix_rational(model.n(), &pts, t, d, limit)
}

pub fn jet_matrix_rational(n: usize, pts: &[Vec<BigRational>], t: u32, d: u32, limit: u128) -> Result<JetMatrix> {
    check_size(n, pts.len(), t, d, limit)?;
    let basis = MonomialBasis::new(n, d);
    let sigmas = MonomialBasis::new(n, t - 1).exponents;
    let mut rows = Vec::with_capacity(pts.len() * sigmas.len());
    let mut labels = Vec::with_capacity(rows.capacity());
    for (w, x) in pts.iter().enumerate() {
        let pw = powers(x, d);
        for sigma in &sigmas {
            let row: Vec<BigRational> = basis
                .exponents
                .iter()
                .map(|alpha| {
                    if alpha.iter().zip(sigma).any(|(a, s)| s > a) {
                        return BigRational::zero();
                    }
                    let mut v = BigRational::one();
                    for k in 0..n {
                        let (a, s) = (alpha[k], sigma[k]);
                        if s > 0 {
                            v *= BigRational::from_integer(binomial(BigInt::from(a), BigInt::from(s)));
                        }
                        v *= &pw[k][(a - s) as usize];
                    }
                    v
                })
                .collect();
            rows.push(row);
            labels.push((w, sigma.clone()));
        }
    }
    Ok(JetMatrix {
        matrix: Matrix::from_rows(basis.len(), rows),
        rows: labels,
        basis,
    })
}

/// Polynomials of degree `≤ D` vanishing to order `≥ T` on a point set.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub basis: MonomialBasis,
    pub t: u32,
    pub point_count: usize,
    /// Coefficient vectors over `basis`.
    pub vectors: Vec<Vec<BigRational>>,
}

impl KernelBasis {
    pub fn nullity(&self) -> usize {
        self.vectors.len()
    }
}

pub fn kernel_basis(model: &GroupModel, omega: &[Point], t: u32, d: u32, limit: u128) -> Result<KernelBasis> {
    let pts = rational_points(model, omega)?;
    kernel_basis_rational(model.n(), &pts, t, d, limit)
}

pub fn kernel_basis_rational(n: usize, pts: &[Vec<BigRational>], t: u32, d: u32, limit: u128) -> Result<KernelBasis> {
    let jet = jet_matrix_rational(n, pts, t, d, limit)?;
    let ns = nullspace(&jet.matrix);
    let vectors: Vec<Vec<BigRational>> = ns.row_vecs();
    for (k, v) in vectors.iter().enumerate() {
        for r in jet.matrix.iter_rows() {
            let s = r.iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
            if !s.is_zero() {
                return Err(Error::violation("kernel", k, "kernel vector fails a jet constraint"));
            }
        }
    }
    Ok(KernelBasis {
        basis: jet.basis,
        t,
        point_count: pts.len(),
        vectors,
    })
}

/// `x ∈ 𝓑`: every kernel polynomial vanishes at `x` (so `𝓑 = G` for an
/// empty kernel).
pub fn in_base_locus(kernel: &KernelBasis, x: &[BigRational]) -> bool {
    let pw = powers(x, kernel.basis.d);
    let values: Vec<BigRational> = kernel.basis.exponents.iter().map(|a| monomial_value(&pw, a)).collect();
    kernel.vectors.iter().all(|v| {
        v.iter()
            .zip(&values)
            .filter(|(c, _)| !c.is_zero())
            .fold(BigRational::zero(), |acc, (c, m)| acc + c * m)
            .is_zero()
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRank {
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub nullity: usize,
    pub injective: bool,
    pub surjective: bool,
}

pub fn eval_rank(model: &GroupModel, omega: &[Point], t: u32, d: u32, limit: u128) -> Result<EvalRank> {
    let jet = jet_matrix(model, omega, t, d, limit)?;
    let (_, pivots) = rref(&jet.matrix);
    let rank = pivots.len();
    let (rows, cols) = (jet.matrix.rows(), jet.matrix.cols());
    Ok(EvalRank {
        rank,
        rows,
        cols,
        nullity: cols - rank,
        injective: cols == rank,
        surjective: rows == rank,
    })
}

/// Coefficients of `P(x − g)` over the same basis.
pub fn translate_poly(basis: &MonomialBasis, p: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
    let index = basis.index();
    let neg_powers = powers(&g.iter().map(|x| -x).collect::<Vec<_>>(), basis.d);
    let mut out = vec![BigRational::zero(); basis.len()];
    for (alpha, c) in basis.exponents.iter().zip(p) {
        if c.is_zero() {
            continue;
        }
        // Expand ∏_k (x_k − g_k)^{α_k} over all β ≤ α.
        let mut beta = vec![0u32; alpha.len()];
        'odometer: loop {
            let mut coeff = c.clone();
            for k in 0..alpha.len() {
                coeff *= BigRational::from_integer(binomial(BigInt::from(alpha[k]), BigInt::from(beta[k])));
                coeff *= &neg_powers[k][(alpha[k] - beta[k]) as usize];
            }
            out[index[beta.as_slice()]] += coeff;
            for k in 0..alpha.len() {
                if beta[k] < alpha[k] {
                    beta[k] += 1;
                    continue 'odometer;
                }
                beta[k] = 0;
            }
            break;
        }
    }
    out
}

/// Sampling options for [`locus_probe`] and [`threshold_sweep`].
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub samples: usize,
    pub seed: u64,
    /// Bound on numerators and denominators of sampled rationals.
    pub height: u32,
    pub enumeration_max: u128,
    pub matrix_max: u128,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            samples: 100,
            seed: 0,
            height: 8,
            enumeration_max: DEFAULT_ENUMERATION_MAX,
            matrix_max: DEFAULT_MATRIX_MAX,
        }
    }
}

/// Sampled points for one chain step.
#[derive(Debug, Clone)]
pub struct StepSamples {
    pub step: usize,
    /// Points of `Γ((1−ε)S) + H_i`.
    pub inside: Vec<Vec<BigRational>>,
    /// Points outside `Γ(S) + H_i`; empty when `H_i = G`.
    pub outside: Vec<Vec<BigRational>>,
}

/// Membership test for `Γ(S) + H` via the linear forms vanishing on `H`.
pub struct CosetUnion {
    forms: Vec<Vec<BigRational>>,
    keys: HashSet<Vec<BigRational>>,
}

impl CosetUnion {
    pub fn new(h: &Subgroup, omega: &[Vec<BigRational>]) -> Self {
        let forms: Vec<Vec<BigRational>> = h
            .annihilator()
            .iter_rows()
            .map(|r| r.iter().map(|x| x.as_constant().expect("rational model")).collect())
            .collect();
        let mut u = CosetUnion {
            forms,
            keys: HashSet::new(),
        };
        u.keys = omega.iter().map(|x| u.key(x)).collect();
        u
    }

    fn key(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.forms
            .iter()
            .map(|w| w.iter().zip(x).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        self.keys.contains(&self.key(x))
    }
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: u32) -> BigRational {
    let p = rng.random_range(-num..=num);
    let q = rng.random_range(1..=den.max(1) as i64);
    BigRational::new(p.into(), q.into())
}

/// Seeded samples for every step of `chain`; independent of `T` and `D`.
pub fn probe_samples(
    model: &GroupModel,
    chain: &Chain,
    epsilon: &BigRational,
    options: &ProbeOptions,
) -> Result<Vec<StepSamples>> {
    if !model.is_rational() {
        return Err(Error::SymbolicModelNotSpecialized);
    }
    if !epsilon.is_positive() || epsilon >= &BigRational::one() {
        return Err(Error::ValidationError {
            field: "epsilon".into(),
            message: "must lie in (0, 1)".into(),
        });
    }
    let to_rat = |pts: Vec<Point>| -> Vec<Vec<BigRational>> {
        pts.into_iter().map(|p| p.as_rational().expect("rational model")).collect()
    };
    let one = BigRational::one();
    let omega = to_rat(enumerate_gamma(model, &one, options.enumeration_max)?.points);
    let shrunk = to_rat(enumerate_gamma(model, &(&one - epsilon), options.enumeration_max)?.points);
    let doubled = to_rat(enumerate_gamma(model, &BigRational::from_integer(2.into()), options.enumeration_max)?.points);
    let n = model.n();
    let radius = omega
        .iter()
        .chain(&doubled)
        .flatten()
        .map(|x| x.abs().ceil().to_integer())
        .max()
        .unwrap_or_else(BigInt::zero);
    let radius: i64 = i64::try_from(radius).unwrap_or(i64::MAX / 4).max(1) * 2;
    let h = options.height.max(1);
    let mut out = Vec::new();
    for (i, node) in chain.nodes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        rng.set_stream(i as u64);
        let sub = &node.subgroup;
        let basis: Vec<Vec<BigRational>> = sub
            .basis()
            .iter_rows()
            .map(|r| r.iter().map(|x| x.as_constant().expect("rational model")).collect())
            .collect();
        let inside = if basis.is_empty() {
            let mut pts = shrunk.clone();
            pts.shuffle(&mut rng);
            pts.truncate(options.samples);
            pts
        } else {
            let mut seen = BTreeSet::new();
            let mut attempts = 0;
            while seen.len() < options.samples && attempts < 20 * options.samples {
                attempts += 1;
                let g = &shrunk[rng.random_range(0..shrunk.len())];
                let mut x = g.clone();
                for b in &basis {
                    let c = random_rational(&mut rng, h as i64, h);
                    for (xk, bk) in x.iter_mut().zip(b) {
                        *xk += &c * bk;
                    }
                }
                seen.insert(x);
            }
            seen.into_iter().collect()
        };
        let outside = if sub.dim() == n {
            Vec::new()
        } else {
            let union = CosetUnion::new(sub, &omega);
            let mut pts: Vec<Vec<BigRational>> = doubled.iter().filter(|x| !union.contains(x)).cloned().collect();
            pts.shuffle(&mut rng);
            pts.truncate(options.samples / 2);
            let mut seen: BTreeSet<Vec<BigRational>> = pts.into_iter().collect();
            let mut attempts = 0;
            while seen.len() < options.samples && attempts < 100 * options.samples {
                attempts += 1;
                let x: Vec<BigRational> = (0..n).map(|_| random_rational(&mut rng, radius * h as i64, h)).collect();
                if !union.contains(&x) {
                    seen.insert(x);
                }
            }
            if seen.len() < options.samples {
                return Err(Error::SamplingExhausted {
                    step: i,
                    wanted: options.samples,
                });
            }
            seen.into_iter().collect()
        };
        out.push(StepSamples { step: i, inside, outside });
    }
    Ok(out)
}

/// Verdicts for `𝓑` against `Γ(S) + H_i`.
#[derive(Debug, Clone)]
pub struct StepVerdict {
    pub step: usize,
    /// Every sample of `Γ((1−ε)S) + H_i` lies in `𝓑`.
    pub lower_inclusion: bool,
    /// Every sample outside `Γ(S) + H_i` lies outside `𝓑`.
    pub upper_inclusion: bool,
    pub inside_samples: usize,
    pub outside_samples: usize,
    pub lower_failures: Vec<Vec<BigRational>>,
    pub upper_failures: Vec<Vec<BigRational>>,
}

/// One `D` of a probe.
#[derive(Debug, Clone)]
pub struct LocusEntry {
    pub t: u32,
    pub d: u32,
    pub rank: usize,
    pub nullity: usize,
    pub kernel: KernelBasis,
    pub steps: Vec<StepVerdict>,
    /// Smallest `i` with both verdicts true.
    pub matched: Option<usize>,
}

const MAX_FAILURES: usize = 5;

/// Evaluates `𝓑(Γ(S), T, D)` on precomputed samples.
pub fn probe_with_samples(
    model: &GroupModel,
    t: u32,
    d: u32,
    samples: &[StepSamples],
    options: &ProbeOptions,
) -> Result<LocusEntry> {
    let omega = enumerate_gamma(model, &BigRational::one(), options.enumeration_max)?;
    let kernel = kernel_basis(model, &omega.points, t, d, options.matrix_max)?;
    for (k, p) in omega.points.iter().enumerate() {
        if !in_base_locus(&kernel, &p.as_rational().expect("rational model")) {
            return Err(Error::violation("omega_inclusion", k, "a constraint point is outside the base locus"));
        }
    }
    let steps: Vec<StepVerdict> = samples
        .iter()
        .map(|s| {
            let lower_failures: Vec<Vec<BigRational>> =
                s.inside.iter().filter(|x| !in_base_locus(&kernel, x)).cloned().collect();
            let upper_failures: Vec<Vec<BigRational>> =
                s.outside.iter().filter(|x| in_base_locus(&kernel, x)).cloned().collect();
            StepVerdict {
                step: s.step,
                lower_inclusion: lower_failures.is_empty(),
                upper_inclusion: upper_failures.is_empty(),
                inside_samples: s.inside.len(),
                outside_samples: s.outside.len(),
                lower_failures: lower_failures.into_iter().take(MAX_FAILURES).collect(),
                upper_failures: upper_failures.into_iter().take(MAX_FAILURES).collect(),
            }
        })
        .collect();
    let matched = steps.iter().find(|s| s.lower_inclusion && s.upper_inclusion).map(|s| s.step);
    let cols = kernel.basis.len();
    Ok(LocusEntry {
        t,
        d,
        rank: cols - kernel.nullity(),
        nullity: kernel.nullity(),
        kernel,
        steps,
        matched,
    })
}

pub fn locus_probe(
    model: &GroupModel,
    chain: &Chain,
    t: u32,
    d: u32,
    epsilon: &BigRational,
    options: &ProbeOptions,
) -> Result<LocusEntry> {
    let samples = probe_samples(model, chain, epsilon, options)?;
    probe_with_samples(model, t, d, &samples, options)
}

/// A change of the matched step between consecutive degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub d: u32,
    pub from: Option<usize>,
    pub to: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LocusReport {
    pub t: u32,
    pub entries: Vec<LocusEntry>,
    pub transitions: Vec<Transition>,
    /// `T·𝔖_i` per step, for comparison with the transitions.
    pub thresholds: Vec<(usize, RootedRational, f64)>,
    /// Lower verdicts only turn false, upper verdicts only turn true, and
    /// nullity never decreases as `D` grows.
    pub monotone: bool,
    /// The matched step never increases with `D`.
    pub matched_nonincreasing: bool,
}

pub fn threshold_sweep(
    model: &GroupModel,
    chain: &Chain,
    t: u32,
    d_range: RangeInclusive<u32>,
    epsilon: &BigRational,
    options: &ProbeOptions,
) -> Result<LocusReport> {
    let samples = probe_samples(model, chain, epsilon, options)?;
    let entries = d_range
        .map(|d| probe_with_samples(model, t, d, &samples, options))
        .collect::<Result<Vec<_>>>()?;
    let mut monotone = true;
    let mut matched_nonincreasing = true;
    let mut transitions = Vec::new();
    for w in entries.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        monotone &= b.nullity >= a.nullity;
        for (x, y) in a.steps.iter().zip(&b.steps) {
            monotone &= x.lower_inclusion || !y.lower_inclusion;
            monotone &= !x.upper_inclusion || y.upper_inclusion;
        }
        if let (Some(x), Some(y)) = (a.matched, b.matched) {
            matched_nonincreasing &= y <= x;
        }
        if a.matched != b.matched {
            transitions.push(Transition {
                d: b.d,
                from: a.matched,
                to: b.matched,
            });
        }
    }
    let thresholds = chain
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let tt = BigRational::from_integer(t.into());
            let value = RootedRational {
                radicand: num_traits::pow(tt, s.frak_s.root as usize) * &s.frak_s.radicand,
                root: s.frak_s.root,
            };
            let shown = value.approx();
            (i, value, shown)
        })
        .collect();
    Ok(LocusReport {
        t,
        entries,
        transitions,
        thresholds,
        monotone,
        matched_nonincreasing,
    })
}

pub fn approx_point(x: &[BigRational]) -> Vec<f64> {
    x.iter().map(approx).collect()
}
