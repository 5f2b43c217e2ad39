use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::C64;

/// `Σ_k c_k e^{ik·t}` on `Tⁿ`, finitely many `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<S> {
    n: usize,
    coeffs: BTreeMap<Vec<i64>, S>,
}

impl<S: Scalar> TrigPoly<S> {
    pub fn zero(n: usize) -> Self {
        TrigPoly { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: S) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<i64>, S)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (k, c) in terms {
            if k.len() != n {
                return Err(Error::domain(format!("frequency {k:?} has the wrong length for n = {n}")));
            }
            p.add_term(k, c);
        }
        Ok(p)
    }

    /// Embeds a polynomial in one variable as a function of `t_j` (1-based).
    pub fn in_variable(n: usize, j: usize, p: &TrigPoly<S>) -> Result<Self> {
        if p.n != 1 || j == 0 || j > n {
            return Err(Error::domain("in_variable expects a one-variable polynomial and 1 ≤ j ≤ n"));
        }
        Self::from_terms(
            n,
            p.coeffs.iter().map(|(k, c)| {
                let mut v = vec![0; n];
                v[j - 1] = k[0];
                (v, c.clone())
            }),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, k: Vec<i64>, c: S) {
        debug_assert_eq!(k.len(), self.n);
        let e = self.coeffs.entry(k).or_insert_with(S::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
    }

    pub fn coeff(&self, k: &[i64]) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &S)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mean(&self) -> S {
        self.coeff(&vec![0; self.n])
    }

    /// Largest `|k_j|` over all terms and axes.
    pub fn bandwidth(&self) -> i64 {
        self.coeffs.keys().flat_map(|k| k.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    /// Whether only `t_j` (1-based) appears.
    pub fn depends_only_on(&self, j: usize) -> bool {
        self.coeffs.keys().all(|k| k.iter().enumerate().all(|(i, &v)| v == 0 || i + 1 == j))
    }

    /// Restriction to the `t_j` axis as a one-variable polynomial.
    pub fn axis(&self, j: usize) -> TrigPoly<S> {
        let mut out = TrigPoly::zero(1);
        for (k, c) in &self.coeffs {
            if k.iter().enumerate().all(|(i, &v)| v == 0 || i + 1 == j) {
                out.add_term(vec![k[j - 1]], c.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.coeffs {
            out.add_term(k.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &o.coeffs {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    /// Exact product (convolution of coefficients).
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, x) in &self.coeffs {
            for (b, y) in &o.coeffs {
                let k = a.iter().zip(b).map(|(p, q)| p + q).collect();
                out.add_term(k, x.clone() * y.clone());
            }
        }
        out
    }

    /// `∂_{t_j}` (1-based `j`).
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.coeffs {
            if k[j - 1] != 0 {
                out.add_term(k.clone(), S::i() * S::from_i128(k[j - 1] as i128) * v.clone());
            }
        }
        out
    }

    /// Zero-mean primitive in `t_j` of the non-constant part; requires no `k` with `k_j = 0` besides `k = 0`.
    pub fn primitive(&self, j: usize) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.coeffs {
            if k.iter().all(|&x| x == 0) {
                continue;
            }
            if k[j - 1] == 0 {
                return Err(Error::domain(format!("term {k:?} is constant in t_{j}")));
            }
            out.add_term(k.clone(), v.clone() / (S::i() * S::from_i128(k[j - 1] as i128)));
        }
        Ok(out)
    }

    /// Coefficients of `Re f` (`(c_k + conj c_{−k}) / 2`) or `Im f` (`(c_k − conj c_{−k}) / 2i`).
    pub fn real_part(&self) -> Self {
        self.re_im(false)
    }

    pub fn imag_part(&self) -> Self {
        self.re_im(true)
    }

    fn re_im(&self, imag: bool) -> Self {
        let half = S::from_real(S::Real::from_ratio(&1.into(), &2.into()));
        let mut out = Self::zero(self.n);
        for (k, v) in &self.coeffs {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            let a = v.clone() * half.clone();
            let b = v.conj() * half.clone();
            if imag {
                out.add_term(k.clone(), a / S::i());
                out.add_term(neg, -(b / S::i()));
            } else {
                out.add_term(k.clone(), a);
                out.add_term(neg, b);
            }
        }
        out
    }

    pub fn eval_c64(&self, t: &[f64]) -> C64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let ph: f64 = k.iter().zip(t).map(|(a, b)| *a as f64 * b).sum();
                c.to_c64() * C64::from_polar(1.0, ph)
            })
            .sum()
    }

    /// `Σ |k_j| |c_k|`, a Lipschitz bound in `t_j`.
    pub fn derivative_bound(&self, j: usize) -> f64 {
        self.coeffs.iter().map(|(k, c)| k[j - 1].unsigned_abs() as f64 * c.modulus()).sum()
    }

    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.values().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> TrigPoly<C64> {
        TrigPoly { n: self.n, coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v.to_c64())).collect() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TrigPoly<T> {
        let mut out = TrigPoly::zero(self.n);
        for (k, v) in &self.coeffs {
            out.add_term(k.clone(), f(v));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "terms": self.coeffs.iter().map(|(k, c)| json!({"k": k, "re": c.re().to_json(), "im": c.im().to_json()})).collect::<Vec<_>>(),
        })
    }

    /// `{terms: [{k, re, im}]}`; `k` may be a bare integer when `n = 1`.
    pub fn from_json(v: &Value, n: usize) -> Result<Self> {
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| Error::Parse("trig polynomial needs terms".into()))?;
        let mut p = Self::zero(n);
        for t in terms {
            let k: Vec<i64> = match t.get("k") {
                Some(Value::Number(x)) if n == 1 => vec![x.as_i64().ok_or_else(|| Error::Parse("bad k".into()))?],
                Some(Value::Array(a)) => a.iter().map(|x| x.as_i64().ok_or_else(|| Error::Parse("bad k".into()))).collect::<Result<_>>()?,
                _ => return Err(Error::Parse("term without k".into())),
            };
            if k.len() != n {
                return Err(Error::Parse(format!("k = {k:?} does not have length {n}")));
            }
            let re = match t.get("re") {
                Some(x) => S::Real::from_json(x)?,
                None => <S::Real as num_traits::Zero>::zero(),
            };
            let im = match t.get("im") {
                Some(x) => S::Real::from_json(x)?,
                None => <S::Real as num_traits::Zero>::zero(),
            };
            p.add_term(k, S::from_parts(re, im));
        }
        Ok(p)
    }
}

impl TrigPoly<C64> {
    /// Drops coefficients below `eps · sup`.
    pub fn pruned(mut self, eps: f64) -> Self {
        let s = self.sup_coeff();
        self.coeffs.retain(|_, v| v.norm() > eps * s);
        self
    }
}

#[cfg(test)]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GaussianRational;
    use num_traits::One;

    type Q = GaussianRational;

    #[test]
    fn real_and_imaginary_parts() {
        // f = (1 + 2i) e^{it}: Re f = cos t − 2 sin t, Im f = 2 cos t + sin t
        let f = TrigPoly::<Q>::from_terms(1, [(vec![1], Q::new(crate::scalar::rational_from_i128(1), crate::scalar::rational_from_i128(2)))]).unwrap();
        for t in [0.0, 0.7, 2.1] {
            let v = f.eval_c64(&[t]);
            assert!((f.real_part().eval_c64(&[t]) - c64(v.re, 0.0)).norm() < 1e-12);
            assert!((f.imag_part().eval_c64(&[t]) - c64(v.im, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn primitive_inverts_derivative() {
        let f = TrigPoly::<Q>::from_terms(2, [(vec![1, 0], Q::one()), (vec![-2, 0], Q::i()), (vec![0, 0], Q::from_i128(5))]).unwrap();
        let g = f.primitive(1).unwrap();
        assert_eq!(g.derivative(1), f.sub(&TrigPoly::constant(2, Q::from_i128(5))));
        assert!(f.add(&TrigPoly::from_terms(2, [(vec![0, 1], Q::one())]).unwrap()).primitive(1).is_err());
    }

    #[test]
    fn product_matches_pointwise() {
        let a = TrigPoly::<C64>::from_terms(2, [(vec![1, -1], c64(0.5, 1.0)), (vec![0, 2], c64(-1.0, 0.0))]).unwrap();
        let b = TrigPoly::<C64>::from_terms(2, [(vec![2, 1], c64(0.0, 1.0)), (vec![0, 0], c64(3.0, 0.0))]).unwrap();
        let t = [0.3, -1.2];
        assert!((a.mul(&b).eval_c64(&t) - a.eval_c64(&t) * b.eval_c64(&t)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let a = TrigPoly::<Q>::from_terms(1, [(vec![3], Q::new(crate::scalar::rational_from_i128(1), crate::scalar::rational_from_i128(-2)))]).unwrap();
        assert_eq!(TrigPoly::<Q>::from_json(&a.to_json(), 1).unwrap(), a);
    }
}
