use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::diophantine::interval::RealInterval;
use crate::error::{Error, Result};

/// Convergent `p/q` of a continued fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// Convergents of `x`, stopping early once the partial quotient is no longer
/// determined by the interval (or the expansion terminates).
pub fn continued_fraction(x: &RealInterval, depth: usize) -> Result<Vec<Convergent>> {
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    let (mut pm2, mut pm1) = (BigInt::zero(), BigInt::one());
    let (mut qm2, mut qm1) = (BigInt::one(), BigInt::zero());
    let mut lo = x.lo.clone();
    let mut hi = x.hi.clone();
    let mut out = Vec::new();
    while out.len() < depth {
        let a = lo.floor();
        if a != hi.floor() {
            // the interval still holds the terminating expansion ending in ⌊hi⌋
            let k = hi.floor().to_integer();
            if out.is_empty() || k >= BigInt::one() {
                out.push(Convergent { p: &k * &pm1 + &pm2, q: &k * &qm1 + &qm2 });
            }
            break;
        }
        let a = a.to_integer();
        let p = &a * &pm1 + &pm2;
        let q = &a * &qm1 + &qm2;
        out.push(Convergent { p: p.clone(), q: q.clone() });
        (pm2, pm1, qm2, qm1) = (pm1, p, qm1, q);
        let fl = &lo - BigRational::from_integer(a.clone());
        let fh = &hi - BigRational::from_integer(a);
        if fl.is_zero() {
            // exact integer remainder ends the expansion; a straddling interval is undetermined
            break;
        }
        (lo, hi) = (fh.recip(), fl.recip());
    }
    Ok(out)
}

/// Result of [`detect_rational`].
#[derive(Clone, Debug, PartialEq)]
pub enum RationalDetection {
    /// `q0` is the least common denominator; `precision_limited` when read off intervals.
    Rational { q0: BigInt, components: Vec<BigRational>, precision_limited: bool },
    NotRationalAtPrecision { digits: u32, convergents: Vec<Vec<Convergent>> },
}

impl RationalDetection {
    pub fn q0(&self) -> Option<&BigInt> {
        match self {
            RationalDetection::Rational { q0, .. } => Some(q0),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            RationalDetection::Rational { q0, components, precision_limited } => json!({
                "rational": true,
                "q0": q0.to_string(),
                "components": components.iter().map(crate::scalar::format_rational).collect::<Vec<_>>(),
                "precision_limited": precision_limited,
            }),
            RationalDetection::NotRationalAtPrecision { digits, convergents } => json!({
                "rational": false,
                "precision_digits": digits,
                "convergents": convergents.iter().map(|c| c.iter().take(12).map(|v| format!("{}/{}", v.p, v.q)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Least common denominator of exact rationals.
pub fn lcm_denominators(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Exact inputs: `q0 = lcm` of denominators. Interval inputs count as rational
/// only if every component contains a convergent with `q ≤ 10^{digits/2 − 2}`.
pub fn detect_rational(alpha: &[RealInterval]) -> Result<RationalDetection> {
    if alpha.iter().all(RealInterval::is_exact) {
        let comps: Vec<BigRational> = alpha.iter().map(|a| a.lo.clone()).collect();
        return Ok(RationalDetection::Rational { q0: lcm_denominators(&comps), components: comps, precision_limited: false });
    }
    let digits = alpha.iter().map(|a| a.certified_digits()).min().unwrap_or(0);
    let qcap = num_traits::pow(BigInt::from(10), (digits / 2).saturating_sub(2) as usize);
    let mut comps = Vec::new();
    let mut all_cf = Vec::new();
    for a in alpha {
        let cf = continued_fraction(a, 10_000)?;
        let hit = cf.iter().find(|c| c.q <= qcap && a.contains(&c.value())).map(Convergent::value);
        // an interval around an integer may end the expansion before the hit is recorded
        let hit = hit.or_else(|| {
            let r = a.mid().round();
            (a.contains(&r) && !a.is_exact()).then_some(r)
        });
        if let Some(v) = hit {
            comps.push(v);
        }
        all_cf.push(cf);
    }
    if comps.len() == alpha.len() {
        Ok(RationalDetection::Rational { q0: lcm_denominators(&comps), components: comps, precision_limited: true })
    } else {
        Ok(RationalDetection::NotRationalAtPrecision { digits, convergents: all_cf })
    }
}

/// `|x − p/q|` upper bound over the interval.
pub fn max_abs_error(x: &RealInterval, v: &BigRational) -> BigRational {
    let a = (&x.lo - v).abs();
    let b = (&x.hi - v).abs();
    if a > b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let cf = continued_fraction(&RealInterval::golden(50), 8).unwrap();
        let got: Vec<(i64, i64)> = cf.iter().map(|c| (c.p.clone().try_into().unwrap(), c.q.clone().try_into().unwrap())).collect();
        assert_eq!(got, vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8), (21, 13), (34, 21)]);
    }

    #[test]
    fn rational_expansion_terminates() {
        let cf = continued_fraction(&RealInterval::exact(q(1, 2)), 10).unwrap();
        assert_eq!(cf.last().unwrap().value(), q(1, 2));
        assert_eq!(cf.len(), 2);
    }

    #[test]
    fn convergent_quality() {
        let x = RealInterval::sqrt(&q(2, 1), 60).unwrap();
        let cf = continued_fraction(&x, 40).unwrap();
        for c in &cf {
            let bound = BigRational::new(BigInt::one(), &c.q * &c.q);
            assert!(max_abs_error(&x, &c.value()) < bound);
        }
    }

    #[test]
    fn detect_examples() {
        let r = detect_rational(&[RealInterval::exact(q(1, 2)), RealInterval::exact(q(1, 3))]).unwrap();
        assert_eq!(r.q0(), Some(&BigInt::from(6)));
        let r = detect_rational(&[RealInterval::exact(q(0, 1)), RealInterval::exact(q(0, 1))]).unwrap();
        assert_eq!(r.q0(), Some(&BigInt::from(1)));
        match detect_rational(&[RealInterval::golden(50)]).unwrap() {
            RationalDetection::NotRationalAtPrecision { digits, convergents } => {
                assert!(digits >= 49);
                assert_eq!(convergents[0][4].value(), q(8, 5));
            }
            other => panic!("{other:?}"),
        }
        let r = detect_rational(&[RealInterval::from_decimal("0.33333333333333333333333333333333333333333333333333").unwrap()]).unwrap();
        assert_eq!(r.q0(), Some(&BigInt::from(3)));
    }
}
