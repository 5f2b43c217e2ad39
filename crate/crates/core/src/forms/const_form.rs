use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::forms::multi_index::{merge_sign, MultiIndex};
use crate::scalar::{Scalar, Tolerance};

/// Constant p-form `Σ F_K dt_K` on ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstPForm<S> {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> ConstPForm<S> {
    pub fn zero(n: usize, degree: usize) -> Self {
        ConstPForm { n, degree, coeffs: BTreeMap::new() }
    }

    /// The 0-form with value `c`.
    pub fn scalar(n: usize, c: S) -> Self {
        let mut f = Self::zero(n, 0);
        f.add_term(MultiIndex::EMPTY, c);
        f
    }

    /// Basis element `dt_K` from 1-based entries.
    pub fn basis(n: usize, entries: &[usize]) -> Result<Self> {
        let k = MultiIndex::new(entries, n)?;
        let mut f = Self::zero(n, k.len());
        f.add_term(k, S::one());
        Ok(f)
    }

    /// `Σ_j v_j dt_j`.
    pub fn one_form(v: Vec<S>) -> Self {
        let n = v.len();
        let mut f = Self::zero(n, 1);
        for (j, c) in v.into_iter().enumerate() {
            f.add_term(MultiIndex::single(j + 1), c);
        }
        f
    }

    pub fn from_terms(n: usize, degree: usize, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Result<Self> {
        let mut f = Self::zero(n, degree);
        for (k, c) in terms {
            f.check_index(k)?;
            f.add_term(k, c);
        }
        Ok(f)
    }

    fn check_index(&self, k: MultiIndex) -> Result<()> {
        if k.len() != self.degree || k.max_entry() > self.n {
            return Err(Error::domain(format!(
                "index {k:?} does not fit a {}-form on C^{}",
                self.degree, self.n
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, k: MultiIndex) -> S {
        self.coeffs.get(&k).cloned().unwrap_or_else(S::zero)
    }

    /// The `j`-th coefficient of a 1-form.
    pub fn component(&self, j: usize) -> S {
        self.get(MultiIndex::single(j))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c dt_K`; exactly vanishing coefficients are dropped.
    pub fn add_term(&mut self, k: MultiIndex, c: S) {
        debug_assert_eq!(k.len(), self.degree);
        match self.coeffs.remove(&k) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.coeffs.insert(k, s);
                }
            }
            None => {
                if !c.is_zero() {
                    self.coeffs.insert(k, c);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sup norm of the coefficient vector.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    /// Largest squared modulus, exact in exact mode.
    pub fn sup_norm_sqr(&self) -> S::Real {
        let mut best = <S::Real as num_traits::Zero>::zero();
        for c in self.coeffs.values() {
            let m = c.norm_sqr_real();
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Zero test: literal in exact mode, relative to `scale` otherwise.
    pub fn is_negligible(&self, tol: &Tolerance, scale: f64) -> bool {
        if S::EXACT {
            self.is_zero()
        } else {
            tol.is_negligible(self.sup_norm(), scale, false)
        }
    }

    /// Drops coefficients below the relative threshold (float mode only).
    pub fn normalized(mut self, tol: &Tolerance) -> Self {
        if !S::EXACT {
            let scale = self.sup_norm();
            self.coeffs.retain(|_, c| !tol.is_zero(c, scale));
        }
        self
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(*k, v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(*k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(*k, -v.clone());
        }
        Ok(out)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.degree != other.degree {
            return Err(Error::domain(format!(
                "shape mismatch: ({}, {}) vs ({}, {})",
                self.n, self.degree, other.n, other.degree
            )));
        }
        Ok(())
    }

    /// Exterior product; the zero form of degree `p + q` when `p + q > n`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::domain(format!("ambient dimensions differ: {} vs {}", self.n, other.n)));
        }
        let mut out = Self::zero(self.n, self.degree + other.degree);
        if out.degree > self.n {
            return Ok(out);
        }
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let s = merge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                let v = x.clone() * y.clone();
                out.add_term(MultiIndex::from_bits(a.bits() | b.bits()), if s > 0 { v } else { -v });
            }
        }
        Ok(out)
    }

    /// Interior product with `e_mu`: `Σ_{J ∋ mu} sign(mu, J) F_J dt_{J∖mu}`.
    pub fn interior(&self, mu: usize) -> Self {
        let mut out = Self::zero(self.n, self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (j, v) in &self.coeffs {
            if j.contains(mu) {
                let rest = j.without(mu);
                let s = merge_sign(MultiIndex::single(mu), rest);
                out.add_term(rest, if s > 0 { v.clone() } else { -v.clone() });
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ConstPForm<T> {
        let mut out = ConstPForm::zero(self.n, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(*k, f(v));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GaussianRational, C64};
    use num_traits::{One, Zero};

    type Q = GaussianRational;

    fn q(v: i64) -> Q {
        Q::from_i128(v as i128)
    }

    #[test]
    fn basis_wedges() {
        let d1 = ConstPForm::<Q>::basis(2, &[1]).unwrap();
        let d2 = ConstPForm::<Q>::basis(2, &[2]).unwrap();
        let d12 = ConstPForm::<Q>::basis(2, &[1, 2]).unwrap();
        assert_eq!(d1.wedge(&d2).unwrap(), d12);
        assert_eq!(d2.wedge(&d1).unwrap(), d12.scale(&-Q::one()));
        let s = d1.add(&d2).unwrap();
        assert!(s.wedge(&s).unwrap().is_zero());
    }

    #[test]
    fn wedge_past_top_degree_is_zero() {
        let a = ConstPForm::<Q>::basis(2, &[1, 2]).unwrap();
        let b = ConstPForm::<Q>::basis(2, &[1]).unwrap();
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.degree(), 3);
        assert!(w.is_zero());
        let c = ConstPForm::<Q>::basis(3, &[1]).unwrap();
        assert!(a.wedge(&c).is_err());
    }

    #[test]
    fn interior_undoes_wedge_on_complement() {
        // e_1 ⌟ (dt1 ∧ F) = F when F has no dt1
        let f = ConstPForm::<Q>::from_terms(
            4,
            2,
            [(MultiIndex::new(&[2, 3], 4).unwrap(), q(3)), (MultiIndex::new(&[3, 4], 4).unwrap(), q(-2))],
        )
        .unwrap();
        let d1 = ConstPForm::<Q>::basis(4, &[1]).unwrap();
        assert_eq!(d1.wedge(&f).unwrap().interior(1), f);
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut f = ConstPForm::<C64>::zero(3, 1);
        f.add_term(MultiIndex::single(1), C64::new(1.0, 0.0));
        f.add_term(MultiIndex::single(1), C64::new(-1.0, 0.0));
        f.add_term(MultiIndex::single(2), C64::zero());
        assert!(f.is_zero());
        assert_eq!(f.sup_norm(), 0.0);
    }
}
