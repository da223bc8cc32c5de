//! Scalar abstraction and exact rational helpers.
//!
//! The linear-algebra kernels ([`crate::linalg`], [`crate::lp::simplex`],
//! [`crate::geometry`]) are written against [`Field`], so they run over any
//! exact ordered field. The model checker itself instantiates them with
//! [`Rational`].

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// An ordered field with exact arithmetic.
///
/// Pivoting decisions compare against zero, so implementations are expected
/// to be exact (`BigRational`, `Ratio<i128>`, ...).
pub trait Field: Clone + Debug + PartialOrd + Num + Neg<Output = Self> {
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }
}

impl<T> Field for T where T: Clone + Debug + PartialOrd + Num + Neg<Output = T> {}

/// Arbitrary-precision rational used for every probability.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, an integer, or a decimal literal (`"0.25"`, `"1e-3"` is not
/// accepted) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Number(text.to_string()));
    }
    let bad = || Error::Number(text.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

/// Canonical exact rendering: `"3/5"`, `"0"`, `"1"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering rounded half away from zero to `places` digits.
pub fn format_decimal(r: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let floor = scaled.numer().div_floor(scaled.denom());
    let rem = scaled - Rational::from_integer(floor.clone());
    let rounded = if rem * int(2) >= Rational::one() {
        floor + BigInt::one()
    } else {
        floor
    };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded_is_zero(&int_part, &frac_part) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = frac_part.to_string();
    format!("{sign}{int_part}.{}{frac}", "0".repeat(places - frac.len()))
}

fn rounded_is_zero(a: &BigInt, b: &BigInt) -> bool {
    a.sign() == Sign::NoSign && b.sign() == Sign::NoSign
}

/// Decimal rendering used in reports: twelve places.
pub fn decimal12(r: &Rational) -> String {
    format_decimal(r, 12)
}

/// Exact probability check: `0 <= p <= 1`.
pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

pub mod serde_rational {
    //! Serde adapter storing rationals as `"p/q"` strings and accepting
    //! decimals on input.
    use super::{format_rational, parse_rational, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(t) => parse_rational(&t).map_err(de::Error::custom),
            Raw::Int(i) => Ok(super::int(i)),
            // JSON numbers are re-read through their shortest decimal form,
            // so 0.1 becomes exactly 1/10.
            Raw::Float(f) => parse_rational(&format!("{f}")).map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/5").unwrap(), rat(3, 5));
        assert_eq!(parse_rational(" 6/10 ").unwrap(), rat(3, 5));
        assert_eq!(parse_rational("0.6").unwrap(), rat(3, 5));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn formats() {
        assert_eq!(format_rational(&rat(6, 10)), "3/5");
        assert_eq!(format_rational(&int(0)), "0");
        assert_eq!(decimal12(&rat(1, 3)), "0.333333333333");
        assert_eq!(decimal12(&rat(2, 3)), "0.666666666667");
        assert_eq!(format_decimal(&rat(-1, 2), 2), "-0.50");
        assert_eq!(format_decimal(&rat(-1, 1000), 2), "0.00");
        assert_eq!(format_decimal(&rat(7, 2), 0), "4");
    }

    #[test]
    fn field_helpers() {
        assert!(rat(1, 2).gt_zero());
        assert!(rat(-1, 2).lt_zero());
        assert!(is_probability(&rat(1, 1)));
        assert!(!is_probability(&rat(5, 4)));
    }
}
