use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::diophantine::interval::RealInterval;
use crate::error::{Error, Result};

fn factorial(k: u32) -> u32 {
    (1..=k).product()
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

/// `ℒ_ℓ = p_ℓ / q_ℓ = Σ_{k ≤ ℓ} 10^{−k!}` with `q_ℓ = 10^{ℓ!}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiouvilleTruncation {
    pub ell: u32,
    pub p: BigInt,
    pub q: BigInt,
}

impl LiouvilleTruncation {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }

    /// `[p/q + 10^{−(ℓ+1)!}, p/q + 2·10^{−(ℓ+1)!}] ∋ ℒ`; the next term is exactly `10^{−(ℓ+1)!}`.
    pub fn bracket(&self) -> RealInterval {
        let unit = BigRational::new(BigInt::one(), pow10(factorial(self.ell + 1)));
        let v = self.value() + &unit;
        RealInterval { hi: &v + unit, lo: v, digits: factorial(self.ell + 1) }
    }

    /// Exact check of `2·10^{−(ℓ+1)!} < q^{−ℓ}`, hence `|ℒ − p/q| < q^{−ℓ}`.
    pub fn certified(&self) -> bool {
        let lhs = &self.bracket().hi - self.value();
        let rhs = BigRational::new(BigInt::one(), num_traits::pow(self.q.clone(), self.ell as usize));
        lhs < rhs
    }
}

/// Truncations `ℓ = 1..=ell_max`; big-integer sizes cap `ell_max` at 5.
pub fn liouville_truncations(ell_max: u32) -> Result<Vec<LiouvilleTruncation>> {
    if ell_max == 0 {
        return Err(Error::domain("ell_max must be at least 1"));
    }
    if ell_max > 5 {
        return Err(Error::Resource(format!("ell_max = {ell_max} needs q = 10^{}! digits; the cap is 5", ell_max)));
    }
    let mut out = Vec::new();
    let mut p = BigInt::from(0);
    let mut prev_exp = 0u32;
    for ell in 1..=ell_max {
        let e = factorial(ell);
        p = p * pow10(e - prev_exp) + 1;
        prev_exp = e;
        out.push(LiouvilleTruncation { ell, p: p.clone(), q: pow10(e) });
    }
    Ok(out)
}

/// Bracket for `ℒ` of width below `10^{−digits}`, from the first truncation that achieves it.
pub fn liouville_interval(digits: u32) -> Result<RealInterval> {
    let target = BigRational::new(BigInt::one(), pow10(digits));
    for t in liouville_truncations(5)? {
        let b = t.bracket();
        if b.width() < target {
            return Ok(b);
        }
    }
    Err(Error::Resource(format!("no truncation up to ℓ = 5 reaches {digits} digits")))
}


/// `Σ_k base^{−e_k}` with super-exponentially growing `e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunarySeries {
    pub base: u32,
    pub exponents: Vec<u32>,
}

impl LacunarySeries {
    /// Partial sum over the first `k` exponents, exact.
    pub fn truncation(&self, k: usize) -> BigRational {
        let b = BigInt::from(self.base);
        self.exponents[..k]
            .iter()
            .map(|&e| BigRational::new(BigInt::one(), num_traits::pow(b.clone(), e as usize)))
            .fold(BigRational::from_integer(0.into()), |a, x| a + x)
    }

    /// `[S_K + u, S_K + 2u]` with `u = base^{−e_{K+1}}`, `K = exponents.len() − 1`.
    /// The tail bound needs `e_{k+1} ≥ e_k + 1` and `base ≥ 2`.
    pub fn interval(&self) -> RealInterval {
        let k = self.exponents.len() - 1;
        let e = self.exponents[k];
        let unit = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(self.base), e as usize));
        let lo = self.truncation(k) + &unit;
        let digits = (e as f64 * (self.base as f64).log10()).floor() as u32;
        RealInterval { hi: &lo + unit, lo, digits }
    }

    /// Denominators `base^{e_k}` of the truncations, `k < exponents.len() − 1`.
    pub fn seeds(&self) -> Vec<BigInt> {
        let n = self.exponents.len() - 1;
        self.exponents[..n].iter().map(|&e| num_traits::pow(BigInt::from(self.base), e as usize)).collect()
    }
}

/// Two Liouville numbers whose pair has no simultaneous witness at desk scale:
/// `ℒ = Σ 10^{−k!}` and `Σ 3^{−⌈4.2·k!⌉}`. The good denominators of one
/// (powers of 10, powers of 3) leave the other at distance about `q^{−1/2}`
/// or worse, because the bases are coprime.
pub fn lacunary_pair() -> [LacunarySeries; 2] {
    let fact: Vec<u32> = (1..=5).map(factorial).collect();
    [
        LacunarySeries { base: 10, exponents: fact.clone() },
        LacunarySeries { base: 3, exponents: fact.iter().map(|&f| (4.2 * f as f64).ceil() as u32).collect() },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_truncations() {
        let t = liouville_truncations(3).unwrap();
        assert_eq!((t[0].p.clone(), t[0].q.clone()), (BigInt::from(1), BigInt::from(10)));
        assert_eq!((t[1].p.clone(), t[1].q.clone()), (BigInt::from(11), BigInt::from(100)));
        assert_eq!((t[2].p.clone(), t[2].q.clone()), (BigInt::from(110001), BigInt::from(1_000_000)));
        assert!(liouville_truncations(6).is_err());
    }

    #[test]
    fn certification_for_two_to_four() {
        for t in liouville_truncations(4).unwrap().iter().skip(1) {
            assert!(t.certified(), "ell = {}", t.ell);
        }
    }

    #[test]
    fn interval_nesting() {
        let t = liouville_truncations(5).unwrap();
        for w in t.windows(2) {
            let (a, b) = (w[0].bracket(), w[1].bracket());
            assert!(a.lo <= b.lo && b.hi <= a.hi);
        }
        let i = liouville_interval(50).unwrap();
        assert_eq!(i.digits, 120);
    }

    #[test]
    fn lacunary_pair_brackets() {
        let [a, b] = lacunary_pair();
        assert_eq!(b.exponents, vec![5, 9, 26, 101, 504]);
        let ia = a.interval();
        assert_eq!(ia, liouville_truncations(4).unwrap()[3].bracket());
        let ib = b.interval();
        assert!(ib.contains(&(b.truncation(4) + BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(3), 504)))));
        assert_eq!(a.seeds().len(), 4);
    }
}
