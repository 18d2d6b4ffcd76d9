//! Run configuration: JSON text with exact scalars written as `"p/q"`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::linalg::{parse_rational, ScalarSpec, SymbolicScalar};
use crate::{Error, GroupModel, ModelConfig, Result, Subgroup};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub enumeration_max: u128,
    pub matrix_max: u128,
    pub candidate_height: u32,
    pub random_candidates: usize,
    pub sample_count: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration_max: crate::gamma::DEFAULT_ENUMERATION_MAX,
            matrix_max: crate::locus::DEFAULT_MATRIX_MAX,
            candidate_height: 2,
            random_candidates: 0,
            sample_count: 100,
        }
    }
}

impl Limits {
    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |message: String| Error::ValidationError {
            field: format!("limits.{key}"),
            message,
        };
        let parse = |v: &str| v.trim().parse::<u128>().map_err(|e| bad(e.to_string()));
        let small = |v: u128| usize::try_from(v).map_err(|_| bad("value too large".into()));
        match key {
            "enumeration_max" => self.enumeration_max = parse(value)?,
            "matrix_max" => self.matrix_max = parse(value)?,
            "candidate_height" => {
                self.candidate_height = u32::try_from(parse(value)?).map_err(|_| bad("value too large".into()))?
            }
            "random_candidates" => self.random_candidates = small(parse(value)?)?,
            "sample_count" => self.sample_count = small(parse(value)?)?,
            _ => {
                return Err(Error::ValidationError {
                    field: "limits".into(),
                    message: format!("unknown limit {key:?}"),
                })
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("enumeration_max", self.enumeration_max),
            ("matrix_max", self.matrix_max),
            ("candidate_height", self.candidate_height as u128),
            ("sample_count", self.sample_count as u128),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::ValidationError {
                    field: format!("limits.{name}"),
                    message: "must be positive".into(),
                });
            }
        }
        Ok(())
    }
}

/// A single degree or an inclusive range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Single(u32),
    Range([u32; 2]),
}

/// A connected subgroup named in a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupSpec {
    Zero,
    Full,
    /// Closure of `ι(Z^j × 0)`.
    Prefix(usize),
    /// Span of the listed vectors of `G`.
    Span(Vec<Vec<ScalarSpec>>),
}

impl SubgroupSpec {
    pub fn resolve(&self, model: &GroupModel) -> Result<Subgroup> {
        match self {
            SubgroupSpec::Zero => Ok(model.zero_subgroup()),
            SubgroupSpec::Full => Ok(model.full_subgroup()),
            SubgroupSpec::Prefix(j) => {
                if *j > model.l() {
                    return Err(Error::IndexOutOfRange { index: *j, len: model.l() + 1 });
                }
                Ok(model.prefix_closure(*j))
            }
            SubgroupSpec::Span(rows) => {
                let vectors = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|s| SymbolicScalar::from_spec(s, model.symbols()).map(|x| x.to_poly()))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                model.subgroup_spanned_by(&vectors)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

/// The configuration document as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assignment: BTreeMap<String, String>,
    #[serde(rename = "T", default = "default_t")]
    pub t: u32,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<DegreeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_prime: Option<SubgroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_double_prime: Option<SubgroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_t() -> u32 {
    1
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub model: GroupModel,
    pub t: u32,
    pub degrees: Option<RangeInclusive<u32>>,
    pub epsilon: Option<BigRational>,
    pub seed: u64,
    pub limits: Limits,
    pub lambda: BigRational,
    pub lambdas: Vec<BigRational>,
    pub omega: Option<Vec<Vec<BigRational>>>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    RunConfig::from_file(file)
}

impl RunConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let mut model = GroupModel::from_config(&file.model)?;
        if !file.assignment.is_empty() {
            let assignment = file
                .assignment
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse_rational(v, &format!("assignment.{k}"))?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            model = model.specialize(&assignment, Some(file.seed))?;
        }
        if file.t == 0 {
            return Err(invalid("T", "must be at least 1"));
        }
        let degrees = match &file.d {
            None => None,
            Some(DegreeSpec::Single(d)) => Some(*d..=*d),
            Some(DegreeSpec::Range([lo, hi])) => Some(*lo..=*hi),
        };
        if let Some(r) = &degrees {
            if *r.start() == 0 || r.start() > r.end() {
                return Err(invalid("D", "must be at least 1 with lo <= hi"));
            }
        }
        let epsilon = match &file.epsilon {
            None => None,
            Some(text) => {
                let e = parse_rational(text, "epsilon")?;
                if !e.is_positive() || e >= BigRational::one() {
                    return Err(invalid("epsilon", "must lie in the open interval (0, 1)"));
                }
                Some(e)
            }
        };
        file.limits.validate()?;
        let positive = |text: &str, field: &str| -> Result<BigRational> {
            let v = parse_rational(text, field)?;
            if !v.is_positive() {
                return Err(invalid(field, "must be positive"));
            }
            Ok(v)
        };
        let lambda = match &file.lambda {
            Some(text) => positive(text, "lambda")?,
            None => BigRational::one(),
        };
        let lambdas = file
            .lambdas
            .iter()
            .map(|s| positive(s, "lambdas"))
            .collect::<Result<Vec<_>>>()?;
        let omega = match &file.omega {
            None => None,
            Some(points) => Some(
                points
                    .iter()
                    .map(|p| {
                        if p.len() != model.n() {
                            return Err(invalid("omega", &format!("point has {} coordinates, expected {}", p.len(), model.n())));
                        }
                        p.iter().map(|x| parse_rational(x, "omega")).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        for spec in [&file.h_prime, &file.h_double_prime].into_iter().flatten() {
            spec.resolve(&model)?;
        }
        Ok(RunConfig {
            t: file.t,
            seed: file.seed,
            limits: file.limits.clone(),
            file,
            model,
            degrees,
            epsilon,
            lambda,
            lambdas,
            omega,
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.file.seed = seed;
    }

    pub fn set_limit(&mut self, key: &str, value: &str) -> Result<()> {
        self.limits.set(key, value)?;
        self.file.limits = self.limits.clone();
        Ok(())
    }

    pub fn require_degrees(&self) -> Result<RangeInclusive<u32>> {
        self.degrees.clone().ok_or_else(|| invalid("D", "required by this command"))
    }

    pub fn require_epsilon(&self) -> Result<BigRational> {
        self.epsilon.clone().ok_or_else(|| invalid("epsilon", "required by this command"))
    }

    pub fn h_prime(&self) -> Result<Subgroup> {
        self.file
            .h_prime
            .as_ref()
            .ok_or_else(|| invalid("h_prime", "required by this command"))?
            .resolve(&self.model)
    }

    pub fn h_double_prime(&self) -> Result<Subgroup> {
        self.file
            .h_double_prime
            .as_ref()
            .ok_or_else(|| invalid("h_double_prime", "required by this command"))?
            .resolve(&self.model)
    }
}

fn invalid(field: &str, message: &str) -> Error {
    Error::ValidationError {
        field: field.into(),
        message: message.into(),
    }
}
