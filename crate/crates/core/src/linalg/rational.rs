//! Text form and power products of exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-2.75"`.
pub fn parse_rational(text: &str, field: &str) -> Result<BigRational> {
    let bad = |message: &str| Error::ValidationError {
        field: field.to_string(),
        message: format!("{message}: {text:?}"),
    };
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal"));
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| bad("bad decimal"))?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    let p: BigInt = s.parse().map_err(|_| bad("not a rational"))?;
    Ok(BigRational::from_integer(p))
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `base^exp` for a signed exponent; `base` must be nonzero when `exp < 0`.
pub fn pow(base: &BigRational, exp: i64) -> BigRational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// `prod_j bases[j]^exps[j]`.
pub fn power_product(bases: &[BigRational], exps: &[i64]) -> BigRational {
    bases
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e != 0)
        .fold(BigRational::one(), |acc, (b, &e)| acc * pow(b, e))
}

/// Decimal approximation for display only.
pub fn approx(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("3", "x").unwrap(), rat(3));
        assert_eq!(parse_rational("6/4", "x").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(parse_rational("-2.75", "x").unwrap(), BigRational::new((-11).into(), 4.into()));
        assert_eq!(parse_rational("-0.5", "x").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0", "x").is_err());
        assert!(parse_rational("abc", "x").is_err());
    }

    #[test]
    fn format_round_trips() {
        for s in ["0", "-7", "22/7", "-1/3"] {
            assert_eq!(format_rational(&parse_rational(s, "x").unwrap()), s);
        }
    }

    #[test]
    fn negative_powers() {
        assert_eq!(pow(&rat(4), -1), BigRational::new(1.into(), 4.into()));
        assert_eq!(power_product(&[rat(4), rat(4)], &[1, -1]), rat(1));
    }
}
