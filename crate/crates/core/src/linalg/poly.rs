//! Polynomials in formal, algebraically independent symbols.
//!
//! Group coordinates in symbolic models are affine combinations of the
//! symbols ([`SymbolicScalar`]); fraction-free elimination multiplies those,
//! so the working type is a full multivariate polynomial ([`PolyScalar`]).

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::ExactRing;
use super::rational::{format_rational, parse_rational};

/// Exponent vector of a monomial with trailing zeros trimmed, so the constant
/// monomial is the empty vector. Lexicographic comparison of trimmed vectors
/// is the lex monomial order with symbol 0 largest.
pub type Monomial = Vec<u32>;

/// Multivariate polynomial with rational coefficients; zero terms are never
/// stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PolyScalar {
    terms: BTreeMap<Monomial, BigRational>,
}

impl PolyScalar {
    pub fn constant(value: BigRational) -> Self {
        let mut p = PolyScalar::default();
        p.add_term(Vec::new(), value);
        p
    }

    /// The polynomial `t_index` (0-based).
    pub fn symbol(index: usize) -> Self {
        let mut mono = vec![0; index + 1];
        mono[index] = 1;
        let mut p = PolyScalar::default();
        p.add_term(mono, BigRational::one());
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Vec::is_empty)
    }

    /// The rational value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        Some(
            self.terms
                .values()
                .next()
                .cloned()
                .unwrap_or_else(BigRational::zero),
        )
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum())
            .max()
            .unwrap_or(0)
    }

    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return PolyScalar::default();
        }
        PolyScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    /// Substitutes rational values for the symbols.
    pub fn evaluate(&self, values: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (mono, coeff) in &self.terms {
            let mut t = coeff.clone();
            for (i, &e) in mono.iter().enumerate() {
                for _ in 0..e {
                    t *= &values[i];
                }
            }
            acc += t;
        }
        acc
    }
}

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o += s;
    }
    out
}

fn mono_div(a: &[u32], b: &[u32]) -> Option<Monomial> {
    if b.len() > a.len() {
        return None;
    }
    let mut out = a.to_vec();
    for (o, s) in out.iter_mut().zip(b) {
        *o = o.checked_sub(*s)?;
    }
    Some(trim(out))
}

impl ExactRing for PolyScalar {
    fn zero_elem() -> Self {
        PolyScalar::default()
    }
    fn one_elem() -> Self {
        PolyScalar::constant(BigRational::one())
    }
    fn is_zero_elem(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = PolyScalar::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }
    fn neg_ref(&self) -> Self {
        PolyScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
    fn div_exact(&self, other: &Self) -> Option<Self> {
        let (lead_mono, lead_coeff) = other.leading()?;
        let lead_mono = lead_mono.clone();
        let lead_coeff = lead_coeff.clone();
        let mut rem = self.clone();
        let mut quot = PolyScalar::default();
        while let Some((m, c)) = rem.leading() {
            let qm = mono_div(m, &lead_mono)?;
            let qc = c / &lead_coeff;
            let mut t = PolyScalar::default();
            t.add_term(qm.clone(), qc.clone());
            rem = rem.sub_ref(&t.mul_ref(other));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }
}

impl fmt::Display for PolyScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = mono
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("t{}", i + 1)
                    } else {
                        format!("t{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_rational(coeff))?;
            } else if coeff.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "({})*{}", format_rational(coeff), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An affine combination `c + sum_t a_t * t` of formal symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymbolicScalar {
    pub const_part: BigRational,
    /// Symbol index (0-based) to coefficient; zero coefficients are absent.
    pub symbol_coeffs: BTreeMap<usize, BigRational>,
}

impl SymbolicScalar {
    pub fn rational(value: BigRational) -> Self {
        SymbolicScalar {
            const_part: value,
            symbol_coeffs: BTreeMap::new(),
        }
    }

    pub fn integer(value: i64) -> Self {
        Self::rational(BigRational::from_integer(value.into()))
    }

    pub fn new(const_part: BigRational, coeffs: impl IntoIterator<Item = (usize, BigRational)>) -> Self {
        let symbol_coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        SymbolicScalar {
            const_part,
            symbol_coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.const_part.is_zero() && self.symbol_coeffs.is_empty()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.symbol_coeffs.is_empty().then_some(&self.const_part)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.symbol_coeffs.clone();
        for (k, v) in &other.symbol_coeffs {
            let e = coeffs.entry(*k).or_insert_with(BigRational::zero);
            *e += v;
        }
        Self::new(&self.const_part + &other.const_part, coeffs)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(
            &self.const_part * factor,
            self.symbol_coeffs.iter().map(|(k, v)| (*k, v * factor)),
        )
    }

    pub fn to_poly(&self) -> PolyScalar {
        let mut p = PolyScalar::constant(self.const_part.clone());
        for (&k, v) in &self.symbol_coeffs {
            p = p.add_ref(&PolyScalar::symbol(k).scale(v));
        }
        p
    }

    pub fn evaluate(&self, values: &[BigRational]) -> BigRational {
        let mut acc = self.const_part.clone();
        for (&k, v) in &self.symbol_coeffs {
            acc += v * &values[k];
        }
        acc
    }

    /// Serializable form, naming symbols.
    pub fn to_spec(&self, names: &[String]) -> ScalarSpec {
        if self.symbol_coeffs.is_empty() {
            return ScalarSpec::Plain(format_rational(&self.const_part));
        }
        ScalarSpec::Symbolic {
            constant: format_rational(&self.const_part),
            coeffs: self
                .symbol_coeffs
                .iter()
                .map(|(k, v)| (names[*k].clone(), format_rational(v)))
                .collect(),
        }
    }

    pub fn from_spec(spec: &ScalarSpec, names: &[String]) -> crate::Result<Self> {
        match spec {
            ScalarSpec::Plain(s) => Ok(Self::rational(parse_rational(s, "scalar")?)),
            ScalarSpec::Symbolic { constant, coeffs } => {
                let c = parse_rational(constant, "const")?;
                let mut map = Vec::new();
                for (name, value) in coeffs {
                    let idx = names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| crate::Error::UnknownSymbol(name.clone()))?;
                    map.push((idx, parse_rational(value, "coeffs")?));
                }
                Ok(Self::new(c, map))
            }
        }
    }
}

impl fmt::Display for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.const_part))?;
        for (k, v) in &self.symbol_coeffs {
            write!(f, " + ({})*t{}", format_rational(v), k + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Text form of a scalar: `"p/q"` or `{"const": "p/q", "coeffs": {"t1": "p/q"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Plain(String),
    Symbolic {
        #[serde(rename = "const")]
        constant: String,
        #[serde(default)]
        coeffs: BTreeMap<String, String>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{determinant, rank, Matrix};

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn tau() -> PolyScalar {
        PolyScalar::symbol(0)
    }

    fn c(n: i64) -> PolyScalar {
        PolyScalar::constant(q(n))
    }

    #[test]
    fn proportional_rows_have_rank_one() {
        let m = Matrix::from_rows(2, vec![vec![c(1), tau()], vec![c(2), tau().scale(&q(2))]]);
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn generic_two_by_two_has_rank_two() {
        let m = Matrix::from_rows(2, vec![vec![c(1), tau()], vec![tau(), c(1)]]);
        assert_eq!(rank(&m), 2);
        // oracle: 1 - tau^2
        let expected = c(1).sub_ref(&tau().mul_ref(&tau()));
        assert_eq!(determinant(&m), expected);
    }

    #[test]
    fn exact_division_recovers_factor() {
        let a = tau().add_ref(&c(1));
        let b = tau().sub_ref(&c(3));
        let prod = a.mul_ref(&b);
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&tau().mul_ref(&tau()).add_ref(&c(7))), None);
    }

    #[test]
    fn unit_is_multiplicative_identity() {
        let one = <PolyScalar as ExactRing>::one_elem();
        let prod = one.mul_ref(&tau());
        assert_eq!(prod, tau());
        assert_eq!(c(1).sub_ref(&one.mul_ref(&c(1))), PolyScalar::default());
    }

    #[test]
    fn symbolic_scalar_round_trip() {
        let names = vec!["t1".to_string()];
        let s = SymbolicScalar::new(q(1), [(0, q(2))]);
        let spec = s.to_spec(&names);
        assert_eq!(SymbolicScalar::from_spec(&spec, &names).unwrap(), s);
    }
}
