//! Scalar abstraction shared by every algebraic routine in the crate.
//!
//! Forms, symbols and solvers are generic over [`Scalar`], which is
//! implemented for `Complex<R>` where `R` is any [`Real`]: `f32`, `f64` or
//! an exact [`BigRational`]. Exact mode gives oracle-grade equality tests;
//! float mode gives scale.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Real field underlying a complex scalar.
pub trait Real: Clone + Debug + PartialOrd + Send + Sync + Num + Signed + Neg<Output = Self> + 'static {
    /// Whether arithmetic in this field is exact.
    const EXACT: bool;

    fn to_f64(&self) -> f64;
    /// Converts a double; exact fields take the exact binary value.
    fn from_f64(v: f64) -> Self;
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;
    fn from_i128(v: i128) -> Self;
    /// Exact rational value when the field is exact.
    fn to_rational(&self) -> Option<BigRational>;
    /// JSON encoding: a number for float fields, a `"num/den"` string for exact ones.
    fn to_json(&self) -> Value;
    /// Accepts a JSON number or a rational/decimal string.
    fn from_json(v: &Value) -> Result<Self> {
        let r = match v {
            Value::String(s) => parse_rational(s)?,
            Value::Number(n) => parse_rational(&n.to_string())?,
            other => return Err(Error::Parse(format!("expected number or rational string, got {other}"))),
        };
        Ok(real_from_rational(&r))
    }
}

impl Real for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        ratio_to_f64(num, den)
    }
    fn from_i128(v: i128) -> Self {
        v as f64
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn to_json(&self) -> Value {
        json_number(*self)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            Value::String(s) => Ok(rational_to_f64(&parse_rational(s)?)),
            other => Err(Error::Parse(format!("expected number or rational string, got {other}"))),
        }
    }
}

impl Real for f32 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        ratio_to_f64(num, den) as f32
    }
    fn from_i128(v: i128) -> Self {
        v as f32
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn to_json(&self) -> Value {
        json_number(f64::from(*self))
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }
    fn from_i128(v: i128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(v.to_string()))
}

/// Converts `num/den` to the nearest double without overflowing on huge operands.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if let (Some(a), Some(b)) = (num.to_f64(), den.to_f64()) {
        if a.is_finite() && b.is_finite() && b != 0.0 && a.abs() < 1e300 && b < 1e300 {
            return a / b;
        }
    }
    // Shift both operands so the quotient keeps ~64 significant bits.
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift = nb - db - 64;
    let (n2, d2) = if shift > 0 {
        (num.clone(), den << (shift as usize))
    } else {
        (num << ((-shift) as usize), den.clone())
    };
    let q = (&n2 / &d2).to_f64().unwrap_or(0.0);
    q * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    ratio_to_f64(r.numer(), r.denom())
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"num/den"`, an integer, or a finite decimal literal such as
/// `"-0.125"` / `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
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
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let all = all / BigInt::from(10);
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Complex scalar used as a form coefficient.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    type Real: Real;
    const EXACT: bool;

    fn i() -> Self;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn from_real(re: Self::Real) -> Self {
        Self::from_parts(re, Self::Real::zero())
    }
    fn from_i128(v: i128) -> Self {
        Self::from_real(Self::Real::from_i128(v))
    }
    fn from_c64(z: Complex<f64>) -> Self {
        Self::from_parts(Self::Real::from_f64(z.re), Self::Real::from_f64(z.im))
    }
    fn from_rationals(re: &BigRational, im: &BigRational) -> Self {
        Self::from_parts(
            Self::Real::from_ratio(re.numer(), re.denom()),
            Self::Real::from_ratio(im.numer(), im.denom()),
        )
    }
    fn re(&self) -> &Self::Real;
    fn im(&self) -> &Self::Real;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re().to_f64(), self.im().to_f64())
    }
    fn modulus(&self) -> f64 {
        let z = self.to_c64();
        z.re.hypot(z.im)
    }
    /// Squared modulus in the scalar's own field (exact in exact mode).
    fn norm_sqr_real(&self) -> Self::Real {
        self.re().clone() * self.re().clone() + self.im().clone() * self.im().clone()
    }
}

impl<R: Real> Scalar for Complex<R> {
    type Real = R;
    const EXACT: bool = R::EXACT;

    fn i() -> Self {
        Complex::new(R::zero(), R::one())
    }
    fn from_parts(re: R, im: R) -> Self {
        Complex::new(re, im)
    }
    fn re(&self) -> &R {
        &self.re
    }
    fn im(&self) -> &R {
        &self.im
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

/// Zero test used throughout: exact equality in exact mode, a relative
/// threshold otherwise.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    /// Relative threshold against the max coefficient magnitude.
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance { rel }
    }

    pub fn is_zero<S: Scalar>(&self, value: &S, scale: f64) -> bool {
        if S::EXACT {
            value.is_zero()
        } else {
            let m = value.modulus();
            m == 0.0 || m <= self.rel * scale
        }
    }

    pub fn is_negligible(&self, modulus: f64, scale: f64, exact: bool) -> bool {
        if exact {
            modulus == 0.0
        } else {
            modulus == 0.0 || modulus <= self.rel * scale
        }
    }
}

/// Tolerance set used by solvers and checks.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative zero test on coefficients.
    pub zero_rel: f64,
    /// Wedge compatibility: `‖L∧F‖ ≤ compat_rel·‖L‖·‖F‖`.
    pub compat_rel: f64,
    /// Integrality test for `c_{ξ0}` in float mode.
    pub integral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero_rel: 1e-10, compat_rel: 1e-9, integral: 1e-9 }
    }
}

impl Tolerances {
    pub fn zero(&self) -> Tolerance {
        Tolerance::new(self.zero_rel)
    }
}

/// Converts an exact rational to `R`, used when symbols carry exact data.
pub fn real_from_rational<R: Real>(r: &BigRational) -> R {
    R::from_ratio(r.numer(), r.denom())
}

pub fn rational_from_i128(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// f64 → i128 helper for nearest-integer searches.
pub fn round_to_i128(v: f64) -> i128 {
    v.round().to_i128().unwrap_or(0)
}

pub fn bigint_from_f64(v: f64) -> BigInt {
    BigInt::from_f64(v.round()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GaussianRational;

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("1/2").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.125").unwrap(), BigRational::new((-1).into(), 8.into()));
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert_eq!(parse_rational("1.5e-3").unwrap(), BigRational::new(3.into(), 2000.into()));
        assert_eq!(parse_rational("2e2").unwrap(), BigRational::from_integer(200.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn huge_ratio_converts_without_overflow() {
        let num = num_traits::pow(BigInt::from(10), 400);
        let den = num_traits::pow(BigInt::from(10), 398) * BigInt::from(4);
        assert!((ratio_to_f64(&num, &den) - 25.0).abs() < 1e-12);
        let tiny = ratio_to_f64(&BigInt::from(3), &num_traits::pow(BigInt::from(10), 320));
        assert!(tiny == 0.0 || tiny < 1e-300);
        let small = ratio_to_f64(&BigInt::from(3), &num_traits::pow(BigInt::from(10), 200));
        assert!((small / 3e-200 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_tolerance_is_literal_equality() {
        let tol = Tolerance::default();
        let tiny = GaussianRational::from_rationals(
            &BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 40)),
            &BigRational::zero(),
        );
        assert!(!tol.is_zero(&tiny, 1.0));
        assert!(tol.is_zero(&GaussianRational::zero(), 1.0));
        let c = Complex::new(1e-12, 0.0);
        assert!(tol.is_zero(&c, 1.0));
        assert!(!tol.is_zero(&c, 1e-3));
    }
}
