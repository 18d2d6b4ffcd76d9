use std::cmp::Ordering;

use serde_json::{json, Value};
use slope_chain::chain::candidates::EnumerationLimits;
use slope_chain::chain::{fast_chain, mu_exponents};
use slope_chain::config::RunConfig;
use slope_chain::gamma::{
    box_bounds, counting_check, distribution_checks, enumerate_gamma, translation_check, AlphaReport,
    DistributionOptions, RatioEntry, StepRatios,
};
use slope_chain::linalg::rational::rat;
use slope_chain::locus::{eval_rank, locus_probe, threshold_sweep, LocusEntry, ProbeOptions};
use slope_chain::{build_chain, verify_chain, Error, Point, Result, VerifyOptions};

use crate::report::{self, approx, rational, rationals, rooted};

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    /// False when a reported check failed.
    pub passed: bool,
    pub csv: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            passed: true,
            csv: None,
        }
    }
}

fn csv_text(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::ValidationError {
        field: "csv".into(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::ValidationError {
        field: "csv".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn chain_build(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let chain = build_chain(model)?;
    let mut result = report::chain(model, &chain);
    let path = if fast_chain(model).is_some() { "fast" } else { "greedy" };
    result["path"] = json!(path);
    Ok(Outcome::ok(result))
}

pub fn verify_options(cfg: &RunConfig) -> VerifyOptions {
    VerifyOptions {
        height: cfg.limits.candidate_height,
        random_count: cfg.limits.random_candidates,
        seed: cfg.seed,
        limits: EnumerationLimits {
            box_max: cfg.limits.enumeration_max,
            ..EnumerationLimits::default()
        },
        ..VerifyOptions::default()
    }
}

pub fn chain_verify(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let chain = build_chain(model)?;
    let options = verify_options(cfg);
    let cert = verify_chain(model, &chain, &options)?;
    let mut chi_max: Vec<Option<&slope_chain::PhiValue>> = vec![None; chain.r()];
    for rec in &cert.candidates {
        for (i, c) in rec.chi.iter().enumerate() {
            let better = chi_max[i].is_none_or(|best| c.sub(best).sign(model.scales()) == Ordering::Greater);
            if better {
                chi_max[i] = Some(c);
            }
        }
    }
    let steps: Vec<Value> = chi_max
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (exact, shown) = match c {
                Some(c) => report::phi(model, c),
                None => (Value::Null, Value::Null),
            };
            let witnesses = cert.equality_witnesses.iter().filter(|w| w.step == i).count();
            json!({ "index": i, "chi_max": exact, "chi_max_approx": shown, "equality_witnesses": witnesses })
        })
        .collect();
    let mut by_origin = std::collections::BTreeMap::new();
    for rec in &cert.candidates {
        *by_origin.entry(report::origin(rec.origin)).or_insert(0usize) += 1;
    }
    let scaling: Vec<Value> = cert
        .scaling
        .iter()
        .map(|s| json!({ "alpha": s.alpha, "same_subgroups": s.same_subgroups, "radicands_powered": s.radicands_powered }))
        .collect();
    let result = json!({
        "chain": report::chain(model, &chain),
        "options": {
            "height": options.height,
            "random_candidates": options.random_count,
            "alphas": options.alphas,
        },
        "candidates": cert.candidates.len(),
        "candidates_by_origin": by_origin,
        "psi_matches": cert.psi_matches,
        "steps": steps,
        "scaling": scaling,
        "telescoping": {
            "lhs": rational(&cert.telescoping_lhs),
            "rhs": rational(&cert.telescoping_rhs),
            "equal": cert.telescoping_lhs == cert.telescoping_rhs,
        },
        "verified": true,
    });
    Ok(Outcome::ok(result))
}

pub fn mu(cfg: &RunConfig) -> Result<Outcome> {
    let r = mu_exponents(&cfg.model)?;
    let list: Vec<Value> = r
        .mu_list
        .iter()
        .enumerate()
        .map(|(i, m)| json!({ "index": i, "mu": rational(m), "mu_approx": approx(slope_chain::linalg::rational::approx(m)) }))
        .collect();
    Ok(Outcome::ok(json!({
        "mu_star": rational(&r.mu_star),
        "mu": rational(&r.mu),
        "mu_list": list,
        "well_distributed": r.well_distributed,
        "dims": r.chain.dims(),
    })))
}

fn point(p: &Point) -> Value {
    Value::Array(p.coords.iter().map(|c| Value::String(c.to_string())).collect())
}

pub fn gamma_enumerate(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let bounds = box_bounds(model, &cfg.lambda)?;
    let set = enumerate_gamma(model, &cfg.lambda, cfg.limits.enumeration_max)?;
    let points: Vec<Value> = set.points.iter().map(point).collect();
    let witnesses: Vec<Value> = set.witnesses.iter().map(|w| report::integers(w)).collect();
    Ok(Outcome::ok(json!({
        "lambda": rational(&cfg.lambda),
        "box_bounds": bounds,
        "count": set.len(),
        "points": points,
        "witnesses": witnesses,
    })))
}

fn subgroup_pair(cfg: &RunConfig) -> Result<(slope_chain::Subgroup, slope_chain::Subgroup)> {
    let h1 = match cfg.file.h_prime {
        Some(_) => cfg.h_prime()?,
        None => cfg.model.full_subgroup(),
    };
    let h2 = match cfg.file.h_double_prime {
        Some(_) => cfg.h_double_prime()?,
        None => cfg.model.zero_subgroup(),
    };
    Ok((h1, h2))
}

pub fn gamma_count(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let (h1, h2) = subgroup_pair(cfg)?;
    let lambdas = if cfg.lambdas.is_empty() {
        (1..=4).map(rat).collect()
    } else {
        cfg.lambdas.clone()
    };
    let r = counting_check(model, &h1, &h2, &lambdas, cfg.limits.enumeration_max)?;
    let sweep: Vec<Value> = r
        .sweep
        .iter()
        .map(|p| {
            json!({
                "lambda": rational(&p.lambda),
                "count": p.count,
                "predicted": rational(&p.predicted),
                "predicted_approx": approx(slope_chain::linalg::rational::approx(&p.predicted)),
                "ratio": rational(&p.ratio),
                "ratio_approx": approx(slope_chain::linalg::rational::approx(&p.ratio)),
            })
        })
        .collect();
    let passed = r.exponent_matches != Some(false);
    Ok(Outcome {
        result: json!({
            "h_prime": report::subgroup(model, &h1),
            "h_double_prime": report::subgroup(model, &h2),
            "n_exponents": r.exponents,
            "rank": r.rank,
            "count": r.raw_count,
            "n_value": rational(&r.n_formula_value),
            "ratio": rational(&r.ratio),
            "ratio_approx": approx(slope_chain::linalg::rational::approx(&r.ratio)),
            "ratio_min": rational(&r.ratio_min),
            "ratio_max": rational(&r.ratio_max),
            "sweep": sweep,
            "fitted_exponent_approx": r.fitted_exponent.map_or(Value::Null, approx),
            "exponent_matches": r.exponent_matches,
        }),
        passed,
        csv: None,
    })
}

fn ratio_entry(e: &RatioEntry) -> Value {
    json!({
        "dim": e.dim,
        "count": e.count,
        "ratio": rooted(&e.ratio),
        "ratio_approx": approx(e.ratio.approx()),
    })
}

fn step_ratios(s: &StepRatios) -> Value {
    json!({
        "index": s.step,
        "reference": ratio_entry(&s.reference),
        "candidates": s.candidates.len(),
        "extreme": rooted(&s.extreme),
        "extreme_approx": approx(s.extreme.approx()),
    })
}

fn alpha_report(a: &AlphaReport) -> Value {
    json!({
        "alpha": a.alpha,
        "upper": a.upper.iter().map(step_ratios).collect::<Vec<_>>(),
        "lower": a.lower.iter().map(step_ratios).collect::<Vec<_>>(),
    })
}

pub fn gamma_check(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let (h1, _) = subgroup_pair(cfg)?;
    let t = translation_check(model, &h1, cfg.limits.sample_count, cfg.seed, cfg.limits.enumeration_max)?;
    let samples: Vec<Value> = t
        .samples
        .iter()
        .map(|(w, c)| json!({ "witness": report::integers(w), "count": c }))
        .collect();
    let mut passed = t.holds;
    let mut result = json!({
        "h_prime": report::subgroup(model, &h1),
        "translation": { "bound": t.bound, "samples": samples, "holds": t.holds },
    });
    if let Some(eps) = &cfg.epsilon {
        let chain = build_chain(model)?;
        let options = DistributionOptions {
            height: cfg.limits.candidate_height,
            limit: cfg.limits.enumeration_max,
            ..DistributionOptions::default()
        };
        let scale_factor = 2 * model.n() as u64;
        let d = distribution_checks(model, &chain, eps, scale_factor, &options)?;
        passed &= d.lower_positive;
        result["distribution"] = json!({
            "scale_factor": d.scale_factor,
            "epsilon": rational(&d.epsilon),
            "bracket": rational(&options.bracket),
            "alphas": d.alphas.iter().map(alpha_report).collect::<Vec<_>>(),
            "lower_positive": d.lower_positive,
            "bounded": d.bounded,
        });
    }
    Ok(Outcome {
        result,
        passed,
        csv: None,
    })
}

fn omega(cfg: &RunConfig) -> Result<Vec<Point>> {
    match &cfg.omega {
        Some(points) => Ok(points.iter().map(|p| Point::rational(p.clone())).collect()),
        None => Ok(enumerate_gamma(&cfg.model, &cfg.lambda, cfg.limits.enumeration_max)?.points),
    }
}

pub fn locus_rank(cfg: &RunConfig) -> Result<Outcome> {
    let degrees = cfg.require_degrees()?;
    let points = omega(cfg)?;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for d in degrees {
        let r = eval_rank(&cfg.model, &points, cfg.t, d, cfg.limits.matrix_max)?;
        rows.push(vec![
            d.to_string(),
            r.rank.to_string(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.nullity.to_string(),
            r.injective.to_string(),
            r.surjective.to_string(),
        ]);
        entries.push(json!({
            "D": d,
            "rank": r.rank,
            "rows": r.rows,
            "cols": r.cols,
            "nullity": r.nullity,
            "injective": r.injective,
            "surjective": r.surjective,
        }));
    }
    let header = ["D", "rank", "rows", "cols", "nullity", "injective", "surjective"];
    Ok(Outcome {
        result: json!({ "T": cfg.t, "omega_size": points.len(), "entries": entries }),
        passed: true,
        csv: Some(csv_text(header.iter().map(|s| s.to_string()).collect(), rows)?),
    })
}

fn probe_options(cfg: &RunConfig) -> ProbeOptions {
    ProbeOptions {
        samples: cfg.limits.sample_count,
        seed: cfg.seed,
        enumeration_max: cfg.limits.enumeration_max,
        matrix_max: cfg.limits.matrix_max,
        ..ProbeOptions::default()
    }
}

fn entry(e: &LocusEntry) -> Value {
    let kernel: Vec<Value> = e
        .kernel
        .vectors
        .iter()
        .map(|v| json!({ "coefficients": rationals(v), "polynomial": e.kernel.basis.format(v) }))
        .collect();
    let steps: Vec<Value> = e
        .steps
        .iter()
        .map(|s| {
            json!({
                "index": s.step,
                "lower_inclusion": s.lower_inclusion,
                "upper_inclusion": s.upper_inclusion,
                "inside_samples": s.inside_samples,
                "outside_samples": s.outside_samples,
                "lower_failures": s.lower_failures.iter().map(|x| rationals(x)).collect::<Vec<_>>(),
                "upper_failures": s.upper_failures.iter().map(|x| rationals(x)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "D": e.d,
        "T": e.t,
        "rank": e.rank,
        "nullity": e.nullity,
        "kernel": kernel,
        "steps": steps,
        "matched": e.matched,
    })
}

pub fn locus_probe_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let degrees = cfg.require_degrees()?;
    if degrees.start() != degrees.end() {
        return Err(Error::ValidationError {
            field: "D".into(),
            message: "locus probe takes a single degree; use locus sweep for a range".into(),
        });
    }
    let eps = cfg.require_epsilon()?;
    let chain = build_chain(&cfg.model)?;
    let e = locus_probe(&cfg.model, &chain, cfg.t, *degrees.start(), &eps, &probe_options(cfg))?;
    Ok(Outcome::ok(json!({
        "epsilon": rational(&eps),
        "chain_dims": chain.dims(),
        "entry": entry(&e),
    })))
}

pub fn locus_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let degrees = cfg.require_degrees()?;
    let eps = cfg.require_epsilon()?;
    let chain = build_chain(&cfg.model)?;
    let rep = threshold_sweep(&cfg.model, &chain, cfg.t, degrees, &eps, &probe_options(cfg))?;
    let mut header: Vec<String> = ["D", "rank", "nullity"].iter().map(|s| s.to_string()).collect();
    for i in 0..chain.nodes.len() {
        header.push(format!("lower_{i}"));
        header.push(format!("upper_{i}"));
    }
    header.push("matched".into());
    let rows: Vec<Vec<String>> = rep
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![e.d.to_string(), e.rank.to_string(), e.nullity.to_string()];
            for s in &e.steps {
                row.push(s.lower_inclusion.to_string());
                row.push(s.upper_inclusion.to_string());
            }
            row.push(e.matched.map_or(String::new(), |m| m.to_string()));
            row
        })
        .collect();
    let thresholds: Vec<Value> = rep
        .thresholds
        .iter()
        .map(|(i, v, shown)| json!({ "index": i, "value": rooted(v), "value_approx": approx(*shown) }))
        .collect();
    let transitions: Vec<Value> = rep
        .transitions
        .iter()
        .map(|t| json!({ "D": t.d, "from": t.from, "to": t.to }))
        .collect();
    Ok(Outcome {
        result: json!({
            "epsilon": rational(&eps),
            "T": rep.t,
            "chain_dims": chain.dims(),
            "entries": rep.entries.iter().map(entry).collect::<Vec<_>>(),
            "transitions": transitions,
            "thresholds": thresholds,
            "monotone": rep.monotone,
            "matched_nonincreasing": rep.matched_nonincreasing,
        }),
        passed: rep.monotone,
        csv: Some(csv_text(header, rows)?),
    })
}

pub fn polygon_export(cfg: &RunConfig) -> Result<Outcome> {
    let model = &cfg.model;
    let chain = build_chain(model)?;
    let mut header: Vec<String> = vec!["dim".into(), "phi_approx".into()];
    header.extend((1..=model.l()).map(|j| format!("e_{j}")));
    let rows: Vec<Vec<String>> = chain
        .nodes
        .iter()
        .map(|n| {
            let mut row = vec![n.dim.to_string(), format!("{}", n.phi.approx(model.scales()))];
            row.extend(n.phi.exponents.iter().map(|e| e.to_string()));
            row
        })
        .collect();
    let vertices: Vec<Value> = chain
        .nodes
        .iter()
        .map(|n| {
            let (exact, shown) = report::phi(model, &n.phi);
            json!({ "dim": n.dim, "phi": exact, "phi_approx": shown })
        })
        .collect();
    Ok(Outcome {
        result: json!({ "vertices": vertices, "scales": rationals(model.scales()) }),
        passed: true,
        csv: Some(csv_text(header, rows)?),
    })
}
