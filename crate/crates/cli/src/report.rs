//! JSON encodings of exact values. Floats always sit next to the exact field
//! they approximate, under a key ending in `_approx`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use slope_chain::chain::candidates::Origin;
use slope_chain::chain::{Chain, PhiValue, RootedRational, SlopeValue};
use slope_chain::linalg::{format_rational, PolyMatrix};
use slope_chain::{Error, GroupModel, Subgroup};

pub const SCHEMA: &str = "slope-chain.report.v1";

pub fn rational(x: &BigRational) -> Value {
    Value::String(format_rational(x))
}

pub fn rationals(xs: &[BigRational]) -> Value {
    Value::Array(xs.iter().map(rational).collect())
}

pub fn integers(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn approx(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn rooted(x: &RootedRational) -> Value {
    json!({
        "radicand": rational(&x.radicand),
        "root": x.root,
        "display": x.to_string(),
    })
}

pub fn phi(model: &GroupModel, p: &PhiValue) -> (Value, Value) {
    (json!(p.exponents), approx(p.approx(model.scales())))
}

pub fn slope(model: &GroupModel, s: &SlopeValue) -> (Value, Value) {
    (
        json!({ "numerator": s.numerator.exponents, "denominator": s.denominator }),
        approx(s.approx(model.scales())),
    )
}

pub fn matrix(m: &PolyMatrix) -> Value {
    Value::Array(
        m.iter_rows()
            .map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect()))
            .collect(),
    )
}

pub fn subgroup(model: &GroupModel, h: &Subgroup) -> Value {
    let profile = model.rank_profile(h);
    json!({
        "dim": h.dim(),
        "basis": matrix(h.basis()),
        "gamma_ranks": profile.gamma_ranks,
    })
}

pub fn chain(model: &GroupModel, c: &Chain) -> Value {
    let nodes: Vec<Value> = c
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let (exact, shown) = phi(model, &node.phi);
            let mut v = subgroup(model, &node.subgroup);
            let obj = v.as_object_mut().expect("object");
            obj.insert("index".into(), json!(i));
            obj.insert("phi".into(), exact);
            obj.insert("phi_approx".into(), shown);
            v
        })
        .collect();
    let steps: Vec<Value> = c
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (exact, shown) = slope(model, &s.slope);
            json!({
                "index": i,
                "slope": exact,
                "slope_approx": shown,
                "frak_s": rooted(&s.frak_s),
                "frak_s_approx": approx(s.frak_s.approx()),
            })
        })
        .collect();
    json!({
        "r": c.r(),
        "dims": c.dims(),
        "nodes": nodes,
        "steps": steps,
    })
}

pub fn origin(o: Origin) -> &'static str {
    match o {
        Origin::Exhaustive => "exhaustive",
        Origin::Random => "random",
        Origin::Full => "full",
    }
}

pub fn error(e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("code".into(), json!(e.code()));
    m.insert("message".into(), json!(e.to_string()));
    if let Error::CertificateViolation { check, step, .. } = e {
        m.insert("check".into(), json!(check));
        m.insert("step".into(), json!(step));
    }
    Value::Object(m)
}
