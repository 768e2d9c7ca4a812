//! Scalar abstraction shared by every measure computation.
//!
//! All algorithms are written against [`Scalar`], which is implemented for
//! arbitrary-precision rationals ([`Rational`]), machine rationals
//! ([`Ratio<i64>`]) and `f64`. Only the rational types give exact answers;
//! `f64` is supported for quick approximate exploration.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed};
use thiserror::Error;

/// Arbitrary-precision rational, the canonical exact scalar.
pub type Rational = BigRational;

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display {
    /// `numer / denom`. Panics when `denom == 0`.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// `true` when arithmetic on this type never rounds.
    fn is_exact() -> bool;

    /// Equality used to check structural invariants (total mass one, etc).
    /// Exact types compare with `==`; floats allow a small relative slack.
    fn same(&self, other: &Self) -> bool {
        self == other
    }

    /// `self > 0`. Unlike `Signed::is_positive`, false for `+0.0`.
    fn strictly_positive(&self) -> bool {
        *self > Self::zero()
    }

    /// `self < 0`. Unlike `Signed::is_negative`, false for `-0.0`.
    fn strictly_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// `k / 2^n`.
    fn dyadic(k: u64, n: u32) -> Self {
        let mut den = Self::one();
        let two = Self::from_int(2);
        for _ in 0..n {
            den = den * two.clone();
        }
        Self::from_int(k as i64) / den
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn is_exact() -> bool {
        true
    }

    fn dyadic(k: u64, n: u32) -> Self {
        BigRational::new(BigInt::from(k), BigInt::one() << n)
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }

    fn is_exact() -> bool {
        false
    }

    fn same(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * (1.0 + self.abs().max(other.abs()))
    }
}

/// Total order for scalars; incomparable values (NaN) compare equal.
pub fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

pub fn min<T: Scalar>(a: &T, b: &T) -> T {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

pub fn max<T: Scalar>(a: &T, b: &T) -> T {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

pub fn sort_dedup<T: Scalar>(values: &mut Vec<T>) {
    values.sort_by(cmp);
    values.dedup();
}

pub(crate) fn in_unit_interval<T: Scalar>(x: &T) -> bool {
    *x >= T::zero() && *x <= T::one()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {0:?}: expected \"num/den\" or an integer")]
pub struct ParseRationalError(pub String);

/// Parses `"num/den"` or `"num"`; the denominator must be positive.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let trimmed = text.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if !den.is_positive() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

/// Formats as `"num/den"`, or `"num"` for integers. Always lowest terms.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}
