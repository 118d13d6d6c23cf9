//! Arithmetic backends.
//!
//! Every table, checker and LP in this crate is generic over [`Scalar`]. Two
//! implementations are provided: [`Rational`] (arbitrary precision, all
//! comparisons exact) and `f64` (comparisons against a fixed tolerance).

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Equality tolerance for the float backend.
pub const FLOAT_EQ_TOL: f64 = 1e-12;
/// Feasibility / optimality tolerance for float LP solves.
pub const FLOAT_LP_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
    + for<'a> std::ops::MulAssign<&'a Self>
    + for<'a> std::ops::DivAssign<&'a Self>
{
    /// True for backends whose comparisons carry no rounding error.
    const EXACT: bool;

    /// Converts a float. Exact for the rational backend (binary expansion).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_usize(v: usize) -> Self {
        Self::from_ratio(v as i64, 1)
    }

    /// Exact value of `self` (floats expand their binary fraction).
    fn to_rational(&self) -> Rational;
    /// Nearest representable value.
    fn from_rational(r: &Rational) -> Self;

    /// Tolerance used for equality and sign tests on tables.
    fn eq_tol() -> Self;
    /// Tolerance used by the simplex for feasibility and optimality.
    fn lp_tol() -> Self;

    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);
    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self);

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_finite_val(&self) -> bool {
        true
    }

    /// `self > other + eq_tol`
    fn gt_tol(&self, other: &Self) -> bool {
        let mut t = other.clone();
        t += &Self::eq_tol();
        *self > t
    }

    /// `|self - other| <= eq_tol`
    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs_val() <= Self::eq_tol()
    }

    /// Parses either a decimal literal or a `"p/q"` string.
    fn parse_literal(s: &str) -> Result<Self>;

    /// JSON rendering: a number when representable, otherwise a `"p/q"` string.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for f64 {
    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).expect("finite float")
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    const EXACT: bool = false;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn eq_tol() -> Self {
        FLOAT_EQ_TOL
    }
    fn lp_tol() -> Self {
        FLOAT_LP_TOL
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn is_finite_val(&self) -> bool {
        self.is_finite()
    }
    fn parse_literal(s: &str) -> Result<Self> {
        Ok(ToPrimitive::to_f64(&parse_rational(s)?).unwrap_or(f64::NAN))
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    const EXACT: bool = true;

    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn eq_tol() -> Self {
        Rational::zero()
    }
    fn lp_tol() -> Self {
        Rational::zero()
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn gt_tol(&self, other: &Self) -> bool {
        self > other
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn parse_literal(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn to_json(&self) -> serde_json::Value {
        let fraction = || serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()));
        if self.is_integer() {
            if let Some(v) = self.numer().to_i64() {
                return serde_json::Value::from(v);
            }
        }
        match rational_to_literal(self, 12) {
            RationalLiteral::Decimal(lit) => {
                // only emit a number when the float's shortest rendering is the literal itself
                match lit.parse::<f64>() {
                    Ok(v) if v.to_string() == lit || format!("{v:?}") == lit => {
                        serde_json::Number::from_f64(v).map(serde_json::Value::Number).unwrap_or_else(fraction)
                    }
                    _ => fraction(),
                }
            }
            RationalLiteral::Fraction(s) => serde_json::Value::String(s),
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal (`"-0.0577"`, `"1e-3"`) into
/// an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Renders a rational as a short decimal when its expansion terminates within
/// `max_digits` places, otherwise as `"p/q"`.
pub fn rational_to_literal(r: &Rational, max_digits: usize) -> RationalLiteral {
    if r.is_integer() {
        return RationalLiteral::Decimal(r.numer().to_string());
    }
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut places = 0usize;
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den.is_one() {
        places = twos.max(fives);
    }
    if !den.is_one() || places > max_digits {
        return RationalLiteral::Fraction(format!("{}/{}", r.numer(), r.denom()));
    }
    let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (ip, fp) = padded.split_at(padded.len() - places);
    RationalLiteral::Decimal(format!("{}{}.{}", if neg { "-" } else { "" }, ip, fp))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalLiteral {
    /// Terminating decimal, suitable for a JSON number.
    Decimal(String),
    /// `"p/q"` string.
    Fraction(String),
}

/// Convenience constructor used throughout tests and fixtures.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Best rational approximation of `v` with denominator at most `max_den`
/// (continued fractions).
pub fn snap_rational(v: f64, max_den: i64) -> Rational {
    let sign = if v < 0.0 { -1 } else { 1 };
    let mut x = v.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = x.floor();
        if a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = match (a.checked_mul(p1).and_then(|t| t.checked_add(p0)), a.checked_mul(q1).and_then(|t| t.checked_add(q0))) {
            (Some(p), Some(q)) => (p, q),
            _ => break,
        };
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a as f64;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1 == 0 {
        return <Rational as Scalar>::from_f64(v);
    }
    q(sign * p1, q1)
}

pub fn sum<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::zero(), |mut acc, v| {
        acc += &v;
        acc
    })
}

pub fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.0577").unwrap(), q(577, 10000));
        assert_eq!(parse_rational("-1.5e-2").unwrap(), q(-15, 1000));
        assert_eq!(parse_rational("2").unwrap(), q(2, 1));
        assert_eq!(parse_rational(".25").unwrap(), q(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn literal_rendering() {
        assert_eq!(rational_to_literal(&q(577, 10000), 12), RationalLiteral::Decimal("0.0577".into()));
        assert_eq!(rational_to_literal(&q(-1, 8), 12), RationalLiteral::Decimal("-0.125".into()));
        assert_eq!(rational_to_literal(&q(3, 1), 12), RationalLiteral::Decimal("3".into()));
        assert_eq!(rational_to_literal(&q(1, 3), 12), RationalLiteral::Fraction("1/3".into()));
        for r in [q(577, 10000), q(-1, 8), q(7, 40)] {
            match rational_to_literal(&r, 12) {
                RationalLiteral::Decimal(s) => assert_eq!(parse_rational(&s).unwrap(), r),
                RationalLiteral::Fraction(_) => panic!("expected decimal"),
            }
        }
    }

    #[test]
    fn float_literal_goes_through_rational() {
        assert_eq!(<f64 as Scalar>::parse_literal("1/4").unwrap(), 0.25);
        assert!(<f64 as Scalar>::gt_tol(&1.0, &0.5));
        assert!(!<f64 as Scalar>::gt_tol(&(0.5 + 1e-14), &0.5));
        assert!(<Rational as Scalar>::gt_tol(&q(1, 1000000000000000), &q(0, 1)));
    }

    #[test]
    fn snapping_recovers_small_fractions() {
        assert_eq!(snap_rational(1.0 / 3.0, 1000), q(1, 3));
        assert_eq!(snap_rational(-0.0625, 1000), q(-1, 16));
        assert_eq!(snap_rational(2.0, 1000), q(2, 1));
        assert_eq!(snap_rational(0.0, 1000), q(0, 1));
    }
}
