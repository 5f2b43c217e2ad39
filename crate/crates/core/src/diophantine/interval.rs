use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rational_to_f64};

/// A real number known to lie in `[lo, hi]`, with the decimal precision it was built at.
#[derive(Clone, Debug, PartialEq)]
pub struct RealInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub digits: u32,
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

impl RealInterval {
    pub fn exact(q: BigRational) -> Self {
        RealInterval { lo: q.clone(), hi: q, digits: u32::MAX }
    }

    pub fn int(v: i64) -> Self {
        Self::exact(BigRational::from_integer(v.into()))
    }

    pub fn new(lo: BigRational, hi: BigRational, digits: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain("interval with lo > hi"));
        }
        Ok(RealInterval { lo, hi, digits })
    }

    /// A decimal literal read as correct to its last printed digit.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let v = parse_rational(s)?;
        let frac = s.split(['e', 'E']).next().unwrap_or("").split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
        if s.contains('/') {
            return Ok(Self::exact(v));
        }
        let half = BigRational::new(BigInt::one(), pow10(frac as u32) * 2);
        Ok(RealInterval { lo: &v - &half, hi: &v + &half, digits: frac as u32 })
    }

    /// `√q` to `digits` decimals.
    pub fn sqrt(q: &BigRational, digits: u32) -> Result<Self> {
        Self::nth_root(q, 2, digits)
    }

    /// `q^{1/k}` for `q ≥ 0`, to `digits` decimals.
    pub fn nth_root(q: &BigRational, k: u32, digits: u32) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::domain("root of a negative number"));
        }
        if k == 0 {
            return Err(Error::domain("zeroth root"));
        }
        let (a, b) = (q.numer().clone(), q.denom().clone());
        // q^{1/k} = (a b^{k-1})^{1/k} / b
        let scale = pow10(digits);
        let radicand = a * num_traits::pow(b.clone(), (k - 1) as usize) * num_traits::pow(scale.clone(), k as usize);
        let s = radicand.nth_root(k);
        let den = b * scale;
        let lo = BigRational::new(s.clone(), den.clone());
        let exact = num_traits::pow(s.clone(), k as usize) == radicand;
        let hi = if exact { lo.clone() } else { BigRational::new(s + 1, den) };
        Ok(RealInterval { lo, hi, digits })
    }

    /// `(1 + √5) / 2`.
    pub fn golden(digits: u32) -> Self {
        let s = Self::sqrt(&BigRational::from_integer(5.into()), digits + 2).expect("positive");
        s.add(&Self::int(1)).scale(&BigRational::new(1.into(), 2.into())).with_digits(digits)
    }

    /// Rounds outward to a grid of `10^{−digits}`; the result contains `self`.
    pub fn outward(&self, digits: u32) -> Self {
        if self.is_exact() && self.lo.denom() <= &pow10(digits) {
            return self.clone();
        }
        let s = BigRational::from_integer(pow10(digits));
        let lo = (&self.lo * &s).floor() / &s;
        let hi = (&self.hi * &s).ceil() / &s;
        RealInterval { lo, hi, digits: self.digits.min(digits) }
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.digits = digits;
        self
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.mid())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRational::zero())
    }

    /// Decimal digits actually certified: `⌊−log₁₀ width⌋`.
    pub fn certified_digits(&self) -> u32 {
        if self.is_exact() {
            return u32::MAX;
        }
        let w = self.width();
        let mut d = 0u32;
        let mut scaled = w;
        let ten = BigRational::from_integer(10.into());
        while scaled < BigRational::one() && d < 100_000 {
            scaled *= &ten;
            d += 1;
        }
        d.saturating_sub(1)
    }

    pub fn add(&self, o: &Self) -> Self {
        RealInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, digits: self.digits.min(o.digits) }
    }

    pub fn neg(&self) -> Self {
        RealInterval { lo: -self.hi.clone(), hi: -self.lo.clone(), digits: self.digits }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let a = &self.lo * c;
        let b = &self.hi * c;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        RealInterval { lo, hi, digits: self.digits }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RealInterval { lo, hi, digits: self.digits.min(o.digits) }
    }

    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return Self::int(1);
        }
        let a = num_traits::pow(self.lo.clone(), k as usize);
        let b = num_traits::pow(self.hi.clone(), k as usize);
        let (mut lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if k.is_multiple_of(2) && self.contains_zero() {
            lo = BigRational::zero();
        }
        RealInterval { lo, hi, digits: self.digits }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lo": format_rational(&self.lo),
            "hi": format_rational(&self.hi),
            "approx": self.to_f64(),
            "digits": if self.is_exact() { serde_json::Value::Null } else { self.certified_digits().into() },
        })
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn outward_contains() {
        let g = super::RealInterval::golden(60);
        let c = g.outward(20);
        assert!(c.lo <= g.lo && g.hi <= c.hi);
        assert_eq!(c.certified_digits(), 19);
    }

    use super::*;

    #[test]
    fn roots_bracket() {
        let two = BigRational::from_integer(2.into());
        let s = RealInterval::sqrt(&two, 40).unwrap();
        assert!(s.lo.clone() * s.lo.clone() <= two && two <= s.hi.clone() * s.hi.clone());
        assert!(s.certified_digits() >= 39);
        let c = RealInterval::nth_root(&BigRational::from_integer(27.into()), 3, 10).unwrap();
        assert!(c.is_exact());
        assert_eq!(c.lo, BigRational::from_integer(3.into()));
        let q = RealInterval::nth_root(&BigRational::new(3.into(), 2.into()), 4, 30).unwrap();
        assert!(q.pow(4).contains(&BigRational::new(3.into(), 2.into())));
    }

    #[test]
    fn golden_value() {
        let g = RealInterval::golden(50);
        assert!((g.to_f64() - 1.618033988749895).abs() < 1e-15);
        // φ² = φ + 1
        let lhs = g.pow(2);
        let rhs = g.add(&RealInterval::int(1));
        assert!(lhs.lo <= rhs.hi && rhs.lo <= lhs.hi);
    }

    #[test]
    fn decimal_literals() {
        let d = RealInterval::from_decimal("0.125").unwrap();
        assert!(d.contains(&BigRational::new(1.into(), 8.into())));
        assert_eq!(d.digits, 3);
        assert!(RealInterval::from_decimal("1/3").unwrap().is_exact());
    }
}
