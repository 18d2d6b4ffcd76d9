//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slope_chain::chain::candidates::{exhaustive_candidates, random_candidates, EnumerationLimits};
use slope_chain::chain::{compare_slopes, fast_chain, greedy_chain, mu_exponents, RootedRational};
use slope_chain::gamma::{counting_check, enumerate_gamma};
use slope_chain::linalg::rational::rat;
use slope_chain::linalg::SymbolicScalar;
use slope_chain::locus::{in_base_locus, kernel_basis, kernel_basis_rational, probe_samples, threshold_sweep, ProbeOptions};
use slope_chain::{build_chain, verify_chain, Chain, GroupModel, Point, VerifyOptions};

const MODEL_COUNT: usize = 200;
const CHAIN_BUDGET: Duration = Duration::from_secs(300);
const UNIVARIATE_BUDGET: Duration = Duration::from_secs(60);
const PLANAR_BUDGET: Duration = Duration::from_secs(120);
const PLANAR_SAMPLES: usize = 100;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

type ModelSpec = (usize, Vec<Vec<i64>>, Vec<i64>);

struct Corpus {
    gens: Vec<Vec<i64>>,
    scales: Vec<i64>,
    model: GroupModel,
    chain: Chain,
}

fn random_corpus() -> Vec<ModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..MODEL_COUNT)
        .map(|_| {
            let n = rng.random_range(1..=4usize);
            let l = rng.random_range(1..=4usize);
            let gens = (0..l)
                .map(|_| (0..n).map(|_| rng.random_range(-3..=3i64)).collect())
                .collect();
            let scales = (0..l).map(|_| rng.random_range(1..=100i64)).collect();
            (n, gens, scales)
        })
        .collect()
}

/// Criterion 1 on one model; returns the model and chain for the others.
fn check_model(n: usize, gens: Vec<Vec<i64>>, scales: Vec<i64>, seed: u64) -> Result<Corpus, String> {
    let g: Vec<&[i64]> = gens.iter().map(Vec::as_slice).collect();
    let model = GroupModel::rational(n, &g, &scales).map_err(|e| e.to_string())?;
    let fast = fast_chain(&model).ok_or("no fast path")?.map_err(|e| e.to_string())?;
    let extra: Vec<_> = random_candidates(&model, 8, seed)
        .iter()
        .map(|c| c.to_subgroup(&model))
        .collect();
    let greedy = greedy_chain(&model, &extra).map_err(|e| e.to_string())?;
    if !fast.same_subgroups(&greedy) {
        return Err(format!("fast {:?} differs from greedy {:?}", fast.dims(), greedy.dims()));
    }
    let options = VerifyOptions {
        height: 2,
        ..VerifyOptions::default()
    };
    verify_chain(&model, &fast, &options).map_err(|e| e.to_string())?;
    Ok(Corpus {
        gens,
        scales,
        model,
        chain: fast,
    })
}

fn criterion_1(corpus: &mut Vec<Corpus>) -> Verdict {
    let start = Instant::now();
    let models = random_corpus();
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).min(8);
    let chunks: Vec<Vec<(usize, ModelSpec)>> = (0..threads)
        .map(|t| models.iter().cloned().enumerate().filter(|(i, _)| i % threads == t).collect())
        .collect();
    let mut results: Vec<(usize, Result<Corpus, String>)> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                s.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|(i, (n, g, sc))| (i, check_model(n, g, sc, i as u64)))
                        .collect::<Vec<_>>()
                })
            })
            .flat_map(|h| h.join().unwrap())
            .collect();
        handles
    });
    results.sort_by_key(|(i, _)| *i);
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(c) => corpus.push(c),
            Err(e) => failures.push(format!("model {i}: {e}")),
        }
    }
    let pass = failures.is_empty() && elapsed <= CHAIN_BUDGET;
    Verdict {
        id: 1,
        name: "chain oracle equivalence",
        pass,
        detail: format!(
            "{} models, {} failures, {:.1}s (budget {}s){}",
            MODEL_COUNT,
            failures.len(),
            elapsed.as_secs_f64(),
            CHAIN_BUDGET.as_secs(),
            failures.first().map_or(String::new(), |f| format!("; first: {f}"))
        ),
    }
}

fn criterion_2(corpus: &[Corpus]) -> Verdict {
    let mut bad = Vec::new();
    for (k, c) in corpus.iter().enumerate() {
        let slopes_ok = c
            .chain
            .steps
            .windows(2)
            .all(|w| compare_slopes(&c.model, &w[0].slope, &w[1].slope) == Ordering::Greater);
        let one = RootedRational {
            radicand: BigRational::one(),
            root: 1,
        };
        let frak: Vec<&RootedRational> = c.chain.steps.iter().map(|s| &s.frak_s).collect();
        let frak_ok = frak.windows(2).all(|w| w[0] > w[1]) && frak.last().is_none_or(|s| **s >= one);
        if !(slopes_ok && frak_ok) {
            bad.push(k);
        }
    }
    Verdict {
        id: 2,
        name: "strict slope decrease and frak S ordering",
        pass: bad.is_empty() && !corpus.is_empty(),
        detail: format!("{} chains, {} violations", corpus.len(), bad.len()),
    }
}

fn criterion_3(corpus: &[Corpus]) -> Verdict {
    let mut bad = 0;
    for c in corpus {
        for alpha in [2u32, 3] {
            let powered: Vec<i64> = c.scales.iter().map(|s| s.pow(alpha)).collect();
            let g: Vec<&[i64]> = c.gens.iter().map(Vec::as_slice).collect();
            let m = GroupModel::rational(c.model.n(), &g, &powered).unwrap();
            let same = build_chain(&m).is_ok_and(|ch| ch.same_subgroups(&c.chain));
            bad += usize::from(!same);
        }
    }
    Verdict {
        id: 3,
        name: "scaling invariance",
        pass: bad == 0 && !corpus.is_empty(),
        detail: format!("{} chains x alpha in {{2,3}}, {} mismatches", corpus.len(), bad),
    }
}

/// `rank` of the first `j` generators, by fraction-free elimination.
fn prefix_rank(gens: &[Vec<i64>], j: usize, n: usize) -> usize {
    let mut rows: Vec<Vec<i128>> = gens[..j].iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            let (a, b) = (rows[rank][col], rows[r][col]);
            let pivot = rows[rank].clone();
            for (x, p) in rows[r].iter_mut().zip(&pivot) {
                *x = a * *x - b * p;
            }
            let g = rows[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
            if g > 1 {
                rows[r].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_4(corpus: &[Corpus]) -> Verdict {
    let mut bad = 0;
    for c in corpus {
        let lhs = c
            .chain
            .steps
            .iter()
            .fold(BigRational::one(), |acc, s| acc * &s.frak_s.radicand);
        let mut sorted = c.scales.clone();
        let mut order: Vec<usize> = (0..sorted.len()).collect();
        order.sort_by_key(|&j| std::cmp::Reverse(c.scales[j]));
        sorted.sort_by_key(|&s| std::cmp::Reverse(s));
        let gens: Vec<Vec<i64>> = order.iter().map(|&j| c.gens[j].clone()).collect();
        let mut rhs = BigRational::one();
        for (j, s) in sorted.iter().enumerate() {
            let e = prefix_rank(&gens, j + 1, c.model.n()) - prefix_rank(&gens, j, c.model.n());
            rhs *= num_traits::pow(rat(*s), e);
        }
        bad += usize::from(lhs != rhs);
    }
    Verdict {
        id: 4,
        name: "telescoping identity",
        pass: bad == 0 && !corpus.is_empty(),
        detail: format!("{} chains, {} mismatches", corpus.len(), bad),
    }
}

fn criterion_5() -> Verdict {
    let s = 5i64;
    let tau = SymbolicScalar::new(rat(0), [(0, rat(1))]);
    let model = GroupModel::new(
        2,
        vec!["t1".into()],
        vec![
            Point::rational(vec![rat(1), rat(0)]),
            Point {
                coords: vec![tau, SymbolicScalar::integer(0)],
            },
        ],
        vec![rat(s), rat(s)],
    )
    .unwrap();
    let mut notes = Vec::new();
    let mu = mu_exponents(&model).unwrap();
    let mu_ok = mu.mu_star == rat(2) && mu.mu == rat(0);
    notes.push(format!("mu*={} mu={}", mu.mu_star, mu.mu));
    let chain = build_chain(&model).unwrap();
    let x_axis = model.subgroup_spanned_by(&[Point::rational(vec![rat(1), rat(0)]).to_poly()]).unwrap();
    let chain_ok = chain.dims() == vec![0, 1, 2] && chain.nodes[1].subgroup == x_axis;
    let frak_ok = chain.steps[0].frak_s == RootedRational { radicand: rat(s * s), root: 1 };
    notes.push(format!("dims {:?}, S0={}", chain.dims(), chain.steps[0].frak_s));
    // Independent extremes over the height-3 enumeration.
    let cands = exhaustive_candidates(&model, 3, EnumerationLimits::default()).unwrap();
    let total = model.l() as i64;
    let n = model.n() as i64;
    let mut star = BigRational::zero();
    let mut low: Option<BigRational> = None;
    for k in &cands {
        let rk = *k.profile.last().unwrap() as i64;
        let d = k.dim as i64;
        if d > 0 {
            star = star.max(BigRational::new(rk.into(), d.into()));
        }
        if d < n {
            let v = BigRational::new((total - rk).into(), (n - d).into());
            low = Some(low.map_or(v.clone(), |m: BigRational| m.min(v)));
        }
    }
    let low = low.unwrap_or_else(BigRational::zero);
    let enum_ok = star == rat(2) && low == rat(0);
    notes.push(format!("{} candidates give max {} min {}", cands.len(), star, low));
    let verified = verify_chain(
        &model,
        &chain,
        &VerifyOptions {
            height: 3,
            ..VerifyOptions::default()
        },
    )
    .is_ok();
    notes.push(format!("verify at height 3: {verified}"));
    Verdict {
        id: 5,
        name: "symbolic arithmetic realization",
        pass: mu_ok && chain_ok && frak_ok && enum_ok && verified,
        detail: notes.join(", "),
    }
}

fn criterion_6() -> Verdict {
    let model = |s1: i64, s2: i64| GroupModel::rational(2, &[&[1, 0], &[0, 1]], &[s1, s2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad_ratio = Vec::new();
    for _ in 0..20 {
        let (a, b) = (rng.random_range(2..=100i64), rng.random_range(2..=100i64));
        let m = model(a, b);
        let r = counting_check(&m, &m.full_subgroup(), &m.zero_subgroup(), &[rat(1)], 10_000_000).unwrap();
        let count = (2 * a - 1) * (2 * b - 1);
        let ratio = BigRational::new(count.into(), (a * b).into());
        let ok = r.raw_count as i64 == count && r.ratio == ratio && ratio > rat(1) && ratio < rat(4);
        if !ok {
            bad_ratio.push((a, b));
        }
    }
    let m = model(5, 3);
    let lambdas: Vec<BigRational> = [1, 2, 3, 4, 6, 8].iter().map(|&x| rat(x)).collect();
    let diag = m.subgroup_spanned_by(&[Point::rational(vec![rat(1), rat(1)]).to_poly()]).unwrap();
    let x_axis = m.prefix_closure(1);
    let pairs = [
        ("FULL/ZERO", m.full_subgroup(), m.zero_subgroup(), 2i64),
        ("diagonal/ZERO", diag, m.zero_subgroup(), 1),
        ("FULL/x-axis", m.full_subgroup(), x_axis, 1),
    ];
    let mut exps = Vec::new();
    let mut bad_exp = 0;
    for (name, h1, h2, expected) in pairs {
        let r = counting_check(&m, &h1, &h2, &lambdas, 10_000_000).unwrap();
        let ok = r.rank == expected && r.exponent_matches == Some(true);
        bad_exp += usize::from(!ok);
        exps.push(format!("{name} rank {} fit {:.3}", r.rank, r.fitted_exponent.unwrap_or(f64::NAN)));
    }
    Verdict {
        id: 6,
        name: "counting lemma",
        pass: bad_ratio.is_empty() && bad_exp == 0,
        detail: format!("20 scale pairs, {} outside (1,4); {}", bad_ratio.len(), exps.join("; ")),
    }
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut cases = 0;
    for s in [2i64, 3] {
        let m = GroupModel::rational(1, &[&[1]], &[s]).unwrap();
        let omega = enumerate_gamma(&m, &rat(1), 1_000).unwrap();
        let size = 2 * s - 1;
        let mut grid: Vec<BigRational> = (-s..=s).map(rat).collect();
        grid.push(BigRational::new(1.into(), 2.into()));
        grid.push(BigRational::new((-1).into(), 2.into()));
        for t in 1..=3u32 {
            for d in 1..=12u32 {
                cases += 1;
                let k = kernel_basis(&m, &omega.points, t, d, 1_000_000).unwrap();
                let expected = (d as i64 + 1 - t as i64 * size).max(0) as usize;
                let threshold = (d as i64) >= t as i64 * size;
                let mut ok = k.nullity() == expected && (k.nullity() == 0) == !threshold;
                for x in &grid {
                    let inside = x.is_integer() && x.numer().magnitude() < &BigInt::from(s).magnitude().clone();
                    let want = if threshold { inside } else { true };
                    ok &= in_base_locus(&k, std::slice::from_ref(x)) == want;
                }
                if !ok {
                    bad.push((s, t, d));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        id: 7,
        name: "univariate base-locus law",
        pass: bad.is_empty() && elapsed <= UNIVARIATE_BUDGET,
        detail: format!(
            "{cases} cases (S in {{2,3}}, T<=3, D<=12), {} failures, {:.2}s{}",
            bad.len(),
            elapsed.as_secs_f64(),
            bad.first().map_or(String::new(), |f| format!("; first (S,T,D)={f:?}"))
        ),
    }
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let m = GroupModel::rational(2, &[&[1, 0], &[0, 1]], &[3, 2]).unwrap();
    let chain = build_chain(&m).unwrap();
    let eps = BigRational::new(1.into(), 2.into());
    let options = ProbeOptions {
        samples: PLANAR_SAMPLES,
        seed: 8,
        ..ProbeOptions::default()
    };
    let samples = probe_samples(&m, &chain, &eps, &options).unwrap();
    let points: BTreeSet<Vec<BigRational>> = samples
        .iter()
        .flat_map(|s| s.inside.iter().chain(&s.outside).cloned())
        .collect();
    let omega: Vec<Vec<BigRational>> = enumerate_gamma(&m, &rat(1), 1_000)
        .unwrap()
        .points
        .iter()
        .map(|p| p.as_rational().unwrap())
        .collect();
    let in_gamma = |x: &[BigRational]| {
        x.iter().all(BigRational::is_integer) && x[0].numer().magnitude() <= &2u32.into() && x[1].numer().magnitude() <= &1u32.into()
    };
    let on_lines = |x: &[BigRational]| x[1].is_integer() && x[1].numer().magnitude() <= &1u32.into();
    let mut errors = 0;
    let mut regime_samples = [0usize; 3];
    for d in 1..=7u32 {
        let k = kernel_basis_rational(2, &omega, 1, d, 1_000_000).unwrap();
        let regime = match d {
            0..=2 => 0,
            3 | 4 => 1,
            _ => 2,
        };
        for x in &points {
            let want = match regime {
                0 => true,
                1 => on_lines(x),
                _ => in_gamma(x),
            };
            errors += usize::from(in_base_locus(&k, x) != want);
            regime_samples[regime] += 1;
        }
    }
    let sweep = threshold_sweep(&m, &chain, 1, 1..=7, &eps, &options).unwrap();
    let matched: Vec<Option<usize>> = sweep.entries.iter().map(|e| e.matched).collect();
    let matched_ok = matched == vec![Some(2), Some(2), Some(1), Some(1), Some(0), Some(0), Some(0)];
    let elapsed = start.elapsed();
    Verdict {
        id: 8,
        name: "planar middle regime",
        pass: errors == 0
            && matched_ok
            && sweep.monotone
            && regime_samples.iter().all(|&c| c >= PLANAR_SAMPLES)
            && elapsed <= PLANAR_BUDGET,
        detail: format!(
            "{} distinct samples, membership checks per regime {:?}, {} errors, matched steps {:?}, {:.2}s",
            points.len(),
            regime_samples,
            errors,
            matched.iter().map(|m| m.map_or(-1, |v| v as i64)).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    }
}

/// Exit code, stdout, report file and CSV file of one run.
type RunBytes = (i32, Vec<u8>, Vec<u8>, Vec<u8>);

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "model": {"n": 2, "generators": [["1","0"],["0","1"]], "scales": ["3","2"]},
            "D": [1, 6],
            "epsilon": "1/2",
            "seed": 17,
            "limits": {"sample_count": 30, "random_candidates": 5},
            "h_prime": {"span": [["1","1"]]}
        }"#,
    )
    .unwrap();
    let probe_cfg = dir.path().join("probe.json");
    std::fs::write(
        &probe_cfg,
        std::fs::read_to_string(&cfg).unwrap().replace("\"D\": [1, 6]", "\"D\": 3"),
    )
    .unwrap();
    let commands: [(&str, &str, &std::path::Path); 10] = [
        ("chain", "build", &cfg),
        ("chain", "verify", &cfg),
        ("mu", "", &cfg),
        ("gamma", "enumerate", &cfg),
        ("gamma", "count", &cfg),
        ("gamma", "check", &cfg),
        ("locus", "rank", &cfg),
        ("locus", "probe", &probe_cfg),
        ("locus", "sweep", &cfg),
        ("polygon", "export", &cfg),
    ];
    let mut differing = Vec::new();
    for (a, b, c) in commands {
        let outputs: Vec<RunBytes> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("r{k}.json"));
                let csv = dir.path().join(format!("t{k}.csv"));
                let mut argv = vec!["slope-chain".to_string(), a.to_string()];
                if !b.is_empty() {
                    argv.push(b.to_string());
                }
                argv.extend(["-c".into(), c.display().to_string()]);
                argv.extend(["--out".into(), out.display().to_string(), "--csv".into(), csv.display().to_string()]);
                let mut so = Vec::new();
                let mut se = Vec::new();
                let code = slope_chain_cli::run(argv, &mut so, &mut se);
                let report = std::fs::read(&out).unwrap_or_default();
                let table = std::fs::read(&csv).unwrap_or_default();
                let _ = std::fs::remove_file(&csv);
                (code, so, report, table)
            })
            .collect();
        let ok = outputs[0] == outputs[1] && outputs[0].0 == 0 && !outputs[0].2.is_empty();
        if !ok {
            differing.push(format!("{a} {b}").trim().to_string());
        }
    }
    Verdict {
        id: 9,
        name: "determinism",
        pass: differing.is_empty(),
        detail: format!("{} commands rerun, differing or failing: {:?}", commands.len(), differing),
    }
}

fn main() {
    let mut corpus = Vec::new();
    let verdicts = vec![
        criterion_1(&mut corpus),
        criterion_2(&corpus),
        criterion_3(&corpus),
        criterion_4(&corpus),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let mut failed = 0;
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {}: {}", v.id, v.name, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
