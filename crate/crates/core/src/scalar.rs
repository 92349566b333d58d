//! Scalar abstraction for the LP and lift code.
//!
//! Everything that touches LP values is written against [`Scalar`]. The exact
//! instantiation ([`crate::Rational`]) is what the algorithms rely on: support
//! detection is a zero test and conditioning divides by masses, so only an
//! exact field gives well-defined supports. The `f64` instantiation exists for
//! quick experiments and cross-checks and uses a fixed absolute tolerance.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance used by sign tests. Zero for exact types.
    fn tolerance() -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Converts from an exact rational (used when importing exact data).
    fn from_rational(r: &BigRational) -> Self;

    fn is_exact() -> bool {
        Self::tolerance().is_zero()
    }

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn near_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }

    fn near_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).near_zero()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_pos()
    }

    fn from_count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize fits scalar")
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

/// Renders a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter writing a rational through [`format_rational`].
pub fn serialize_rational<Ser: serde::Serializer>(r: &BigRational, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.serialize_str(&format_rational(r))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a rational (expected `p/q`, an integer or a decimal)")]
pub struct ParseRationalError(pub String);

/// Parses `p/q`, `p`, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseRationalError> {
    let s = text.trim();
    let err = || ParseRationalError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if s.contains('/') {
        let r = BigRational::from_str(s).map_err(|_| err())?;
        return Ok(r);
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{int_digits}{frac_part}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let r = BigRational::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    let n = BigInt::from_str(s).map_err(|_| err())?;
    Ok(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for r in [q(1, 2), q(-7, 3), q(4, 1), q(0, 1)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&q(6, 4)), "3/2");
    }

    #[test]
    fn float_sign_tests_use_tolerance() {
        assert!(1e-12f64.near_zero());
        assert!(!1e-3f64.near_zero());
        assert!(q(1, 1_000_000_000_000).is_pos());
    }
}
