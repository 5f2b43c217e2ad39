use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{ConstPForm, MultiIndex};
use crate::scalar::{Real, Scalar, Tolerances};
use crate::wedge::{compat_residual, wedge_compat, wedge_divide_with, PivotRule};

/// Frequency `(η, ξ) ∈ ℤⁿ × ℤᴺ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Freq {
    pub eta: Vec<i128>,
    pub xi: Vec<i128>,
}

impl Freq {
    pub fn new(eta: Vec<i128>, xi: Vec<i128>) -> Self {
        Freq { eta, xi }
    }

    /// Sup norm `|(η, ξ)|`.
    pub fn norm(&self) -> u128 {
        self.eta.iter().chain(&self.xi).map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eta_norm(&self) -> u128 {
        self.eta.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn xi_norm(&self) -> u128 {
        self.xi.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn shifted_eta(&self, m: &[i128]) -> Freq {
        Freq { eta: self.eta.iter().zip(m).map(|(a, b)| a + b).collect(), xi: self.xi.clone() }
    }

    pub fn neg(&self) -> Freq {
        Freq { eta: self.eta.iter().map(|v| -v).collect(), xi: self.xi.iter().map(|v| -v).collect() }
    }
}

/// Truncation box: `|η| ≤ H`, `|ξ| ≤ X` in the sup norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyBox {
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "X")]
    pub x: u64,
}

impl FrequencyBox {
    pub fn new(h: u64, x: u64) -> Self {
        FrequencyBox { h, x }
    }

    pub fn contains(&self, f: &Freq) -> bool {
        f.eta_norm() <= self.h as u128 && f.xi_norm() <= self.x as u128
    }

    /// All lattice points of `[-r, r]^d` in lexicographic order.
    pub fn cube(d: usize, r: u64) -> Vec<Vec<i128>> {
        let r = r as i128;
        let mut out = vec![Vec::new()];
        for _ in 0..d {
            let mut next = Vec::with_capacity(out.len() * (2 * r as usize + 1));
            for p in &out {
                for v in -r..=r {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn etas(&self, n: usize) -> Vec<Vec<i128>> {
        Self::cube(n, self.h)
    }

    pub fn xis(&self, big_n: usize) -> Vec<Vec<i128>> {
        Self::cube(big_n, self.x)
    }

    pub fn count(&self, n: usize, big_n: usize) -> f64 {
        (2.0 * self.h as f64 + 1.0).powi(n as i32) * (2.0 * self.x as f64 + 1.0).powi(big_n as i32)
    }
}

/// p-form on `T^{n+N}` with trig-polynomial coefficients, stored per frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPForm<S> {
    n: usize,
    big_n: usize,
    degree: usize,
    terms: BTreeMap<Freq, ConstPForm<S>>,
}

/// Why a form failed the exactness test.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactnessFailure {
    /// Nonzero coefficient at `η = 0`: a nonvanishing period.
    NonzeroPeriod { xi: Vec<i128>, magnitude: f64 },
    /// `d_t g ≠ 0` at this frequency.
    NotClosed { eta: Vec<i128>, xi: Vec<i128>, residual: f64 },
}

#[derive(Clone, Debug)]
pub struct ExactnessCertificate<S> {
    pub exact: bool,
    /// `v` with `d_t v = g`, present when exact.
    pub primitive: Option<TrigPForm<S>>,
    pub failures: Vec<ExactnessFailure>,
}

/// `i Σ_j v_j dt_j` for integer `v`.
pub fn eta_form<S: Scalar>(eta: &[i128]) -> ConstPForm<S> {
    ConstPForm::one_form(eta.iter().map(|&e| S::i() * S::from_i128(e)).collect())
}

impl<S: Scalar> TrigPForm<S> {
    pub fn zero(n: usize, big_n: usize, degree: usize) -> Self {
        TrigPForm { n, big_n, degree, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn check_freq(&self, f: &Freq) -> Result<()> {
        if f.eta.len() != self.n || f.xi.len() != self.big_n {
            return Err(Error::domain(format!(
                "frequency {f:?} does not match (n, N) = ({}, {})",
                self.n, self.big_n
            )));
        }
        Ok(())
    }

    pub fn add_term(&mut self, freq: Freq, k: MultiIndex, c: S) -> Result<()> {
        self.check_freq(&freq)?;
        if k.len() != self.degree || k.max_entry() > self.n {
            return Err(Error::domain(format!("index {k:?} invalid for a {}-form", self.degree)));
        }
        let slot = self.terms.entry(freq.clone()).or_insert_with(|| ConstPForm::zero(self.n, self.degree));
        slot.add_term(k, c);
        if slot.is_zero() {
            self.terms.remove(&freq);
        }
        Ok(())
    }

    /// Adds a whole constant form at one frequency.
    pub fn add_slice(&mut self, freq: Freq, form: &ConstPForm<S>) -> Result<()> {
        self.check_freq(&freq)?;
        if form.degree() != self.degree || form.n() != self.n {
            return Err(Error::domain("slice shape mismatch"));
        }
        if form.is_zero() {
            return Ok(());
        }
        let merged = match self.terms.remove(&freq) {
            Some(old) => old.add(form)?,
            None => form.clone(),
        };
        if !merged.is_zero() {
            self.terms.insert(freq, merged);
        }
        Ok(())
    }

    pub fn get(&self, freq: &Freq) -> Option<&ConstPForm<S>> {
        self.terms.get(freq)
    }

    pub fn slices(&self) -> impl Iterator<Item = (&Freq, &ConstPForm<S>)> {
        self.terms.iter()
    }

    pub fn into_slices(self) -> impl Iterator<Item = (Freq, ConstPForm<S>)> {
        self.terms.into_iter()
    }

    pub fn num_frequencies(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.terms.values().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    /// Distinct `ξ` in the support, ascending.
    pub fn xi_support(&self) -> Vec<Vec<i128>> {
        let mut v: Vec<Vec<i128>> = self.terms.keys().map(|f| f.xi.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Restriction to a single `ξ`.
    pub fn restrict_xi(&self, xi: &[i128]) -> Self {
        let mut out = Self::zero(self.n, self.big_n, self.degree);
        for (f, c) in &self.terms {
            if f.xi == xi {
                out.terms.insert(f.clone(), c.clone());
            }
        }
        out
    }

    pub fn in_box(&self, b: &FrequencyBox) -> bool {
        self.terms.keys().all(|f| b.contains(f))
    }

    /// `(max |η|, max |ξ|)` over the support.
    pub fn bandwidth(&self) -> (u128, u128) {
        self.terms.keys().fold((0, 0), |(a, b), f| (a.max(f.eta_norm()), b.max(f.xi_norm())))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n, self.big_n, self.degree);
        for (f, v) in &self.terms {
            let s = v.scale(c);
            if !s.is_zero() {
                out.terms.insert(f.clone(), s);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (f, v) in &other.terms {
            out.add_slice(f.clone(), v)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.n, self.big_n, self.degree) != (other.n, other.big_n, other.degree) {
            return Err(Error::domain("trig form shape mismatch"));
        }
        Ok(())
    }

    /// Sup norm of `self - other` over coefficients.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// Shifts every `η` by `m` (multiplication by `e^{i m·t}`).
    pub fn shift_eta(&self, m: &[i128]) -> Self {
        let mut out = Self::zero(self.n, self.big_n, self.degree);
        for (f, v) in &self.terms {
            out.terms.insert(f.shifted_eta(m), v.clone());
        }
        out
    }

    /// Drops coefficients below the relative zero threshold (float mode).
    pub fn normalized(self, tol: &Tolerances) -> Self {
        if S::EXACT {
            return self;
        }
        let scale = self.sup_norm();
        let zt = tol.zero();
        let mut out = Self::zero(self.n, self.big_n, self.degree);
        for (f, v) in self.terms {
            let mut keep = ConstPForm::zero(self.n, self.degree);
            for (k, c) in v.terms() {
                if !zt.is_zero(c, scale) {
                    keep.add_term(*k, c.clone());
                }
            }
            if !keep.is_zero() {
                out.terms.insert(f, keep);
            }
        }
        out
    }

    /// Hermitian symmetry `coeff(-η, -ξ) = conj(coeff(η, ξ))`, i.e. real-valued.
    pub fn is_real_valued(&self, tol: &Tolerances) -> bool {
        let scale = self.sup_norm();
        let zt = tol.zero();
        for (f, v) in &self.terms {
            let mirror = self.terms.get(&f.neg());
            for (k, c) in v.terms() {
                let m = mirror.map(|m| m.get(*k)).unwrap_or_else(S::zero);
                if !zt.is_zero(&(m - c.conj()), scale) {
                    return false;
                }
            }
        }
        true
    }

    /// Applies a per-frequency constant 1-form: `(L ∧ u)^(η, ξ) = L(η, ξ) ∧ û(η, ξ)`.
    pub fn wedge_slices(&self, mut slice: impl FnMut(&Freq) -> Result<ConstPForm<S>>) -> Result<Self> {
        let mut out = Self::zero(self.n, self.big_n, self.degree + 1);
        if self.degree + 1 > self.n {
            return Ok(out);
        }
        for (f, v) in &self.terms {
            let w = slice(f)?.wedge(v)?;
            if !w.is_zero() {
                out.terms.insert(f.clone(), w);
            }
        }
        Ok(out)
    }

    /// `d_t u`: coefficient `i η_j û_K` on `dt_j ∧ dt_K`.
    pub fn exterior_derivative(&self) -> Self {
        self.wedge_slices(|f| Ok(eta_form(&f.eta))).expect("shapes are consistent")
    }

    /// Tests `d_t g = 0` and vanishing periods; returns a primitive when exact.
    pub fn is_exact(&self, tol: &Tolerances) -> ExactnessCertificate<S> {
        let mut failures = Vec::new();
        if self.degree == 0 {
            return ExactnessCertificate {
                exact: false,
                primitive: None,
                failures: vec![ExactnessFailure::NonzeroPeriod { xi: vec![], magnitude: f64::NAN }],
            };
        }
        let scale = self.sup_norm();
        let zt = tol.zero();
        let mut prim = Self::zero(self.n, self.big_n, self.degree - 1);
        for (f, g) in &self.terms {
            if f.eta.iter().all(|&e| e == 0) {
                if !g.is_negligible(&zt, scale) {
                    failures.push(ExactnessFailure::NonzeroPeriod { xi: f.xi.clone(), magnitude: g.sup_norm() });
                }
                continue;
            }
            let l = eta_form::<S>(&f.eta);
            match wedge_compat(&l, g, tol) {
                Ok(true) => {}
                _ => {
                    failures.push(ExactnessFailure::NotClosed {
                        eta: f.eta.clone(),
                        xi: f.xi.clone(),
                        residual: compat_residual(&l, g).unwrap_or(f64::INFINITY),
                    });
                    continue;
                }
            }
            if let Ok(d) = wedge_divide_with(&l, g, PivotRule::MaxModulus, tol) {
                if !d.u.is_zero() {
                    prim.terms.insert(f.clone(), d.u);
                }
            }
        }
        let exact = failures.is_empty();
        ExactnessCertificate { exact, primitive: exact.then_some(prim), failures }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TrigPForm<T> {
        let mut out = TrigPForm::zero(self.n, self.big_n, self.degree);
        for (fr, v) in &self.terms {
            let m = v.map(&f);
            if !m.is_zero() {
                out.terms.insert(fr.clone(), m);
            }
        }
        out
    }

    /// `{n, N, degree, terms: [{K, eta, xi, re, im}]}`.
    pub fn to_json(&self) -> Value {
        let mut terms = Vec::new();
        for (f, v) in &self.terms {
            for (k, c) in v.terms() {
                terms.push(json!({
                    "K": k.entries(),
                    "eta": f.eta.iter().map(|&e| int_json(e)).collect::<Vec<_>>(),
                    "xi": f.xi.iter().map(|&e| int_json(e)).collect::<Vec<_>>(),
                    "re": c.re().to_json(),
                    "im": c.im().to_json(),
                }));
            }
        }
        json!({"n": self.n, "N": self.big_n, "degree": self.degree, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get_usize = |key: &str| -> Result<usize> {
            v.get(key)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("missing or invalid field {key:?}")))
        };
        let n = get_usize("n")?;
        let big_n = get_usize("N")?;
        let degree = get_usize("degree")?;
        if degree > n {
            return Err(Error::Parse(format!("degree {degree} exceeds n = {n}")));
        }
        let mut out = Self::zero(n, big_n, degree);
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing terms array".into()))?;
        for (i, t) in terms.iter().enumerate() {
            let ctx = |e: Error| Error::Parse(format!("terms[{i}]: {e}"));
            let k: Vec<usize> = serde_json::from_value(t.get("K").cloned().unwrap_or(Value::Null))
                .map_err(|e| Error::Parse(format!("terms[{i}].K: {e}")))?;
            let k = MultiIndex::new(&k, n).map_err(ctx)?;
            let eta = int_vec(t.get("eta")).map_err(ctx)?;
            let xi = int_vec(t.get("xi")).map_err(ctx)?;
            let re = S::Real::from_json(t.get("re").unwrap_or(&Value::from(0))).map_err(ctx)?;
            let im = S::Real::from_json(t.get("im").unwrap_or(&Value::from(0))).map_err(ctx)?;
            out.add_term(Freq::new(eta, xi), k, S::from_parts(re, im)).map_err(ctx)?;
        }
        Ok(out)
    }
}

/// Integers beyond the i64 range are emitted as strings.
pub fn int_json(v: i128) -> Value {
    match i64::try_from(v) {
        Ok(x) => Value::from(x),
        Err(_) => Value::String(v.to_string()),
    }
}

pub fn int_vec(v: Option<&Value>) -> Result<Vec<i128>> {
    let arr = v.and_then(Value::as_array).ok_or_else(|| Error::Parse("expected integer array".into()))?;
    arr.iter()
        .map(|x| match x {
            Value::Number(n) => n.as_i64().map(i128::from).ok_or_else(|| Error::Parse(format!("not an integer: {n}"))),
            Value::String(s) => s.parse::<i128>().map_err(|_| Error::Parse(format!("not an integer: {s:?}"))),
            other => Err(Error::Parse(format!("not an integer: {other}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GaussianRational, C64};
    use num_traits::One;

    type Q = GaussianRational;

    fn fr(eta: &[i128], xi: &[i128]) -> Freq {
        Freq::new(eta.to_vec(), xi.to_vec())
    }

    #[test]
    fn derivative_of_character() {
        let mut u = TrigPForm::<Q>::zero(2, 1, 0);
        u.add_term(fr(&[1, 0], &[0]), MultiIndex::EMPTY, Q::one()).unwrap();
        let du = u.exterior_derivative();
        let mut expect = TrigPForm::<Q>::zero(2, 1, 1);
        expect.add_term(fr(&[1, 0], &[0]), MultiIndex::single(1), Q::i()).unwrap();
        assert_eq!(du, expect);

        let mut c = TrigPForm::<Q>::zero(2, 1, 0);
        c.add_term(fr(&[0, 0], &[3]), MultiIndex::EMPTY, Q::one()).unwrap();
        assert!(c.exterior_derivative().is_zero());
    }

    #[test]
    fn derivative_keeps_only_dt1_dt2() {
        let mut u = TrigPForm::<Q>::zero(2, 0, 1);
        u.add_term(fr(&[1, 1], &[]), MultiIndex::single(2), Q::one()).unwrap();
        let du = u.exterior_derivative();
        let k12 = MultiIndex::new(&[1, 2], 2).unwrap();
        assert_eq!(du.num_frequencies(), 1);
        assert_eq!(du.get(&fr(&[1, 1], &[])).unwrap().get(k12), Q::i());
    }

    #[test]
    fn exactness_examples() {
        let t = Tolerances::default();
        let mut u = TrigPForm::<Q>::zero(1, 0, 0);
        u.add_term(fr(&[1], &[]), MultiIndex::EMPTY, Q::one()).unwrap();
        let cert = u.exterior_derivative().is_exact(&t);
        assert!(cert.exact);
        assert_eq!(cert.primitive.unwrap(), u);

        let mut g = TrigPForm::<Q>::zero(1, 0, 1);
        g.add_term(fr(&[0], &[]), MultiIndex::single(1), Q::one()).unwrap();
        let cert = g.is_exact(&t);
        assert!(!cert.exact);
        assert!(matches!(cert.failures[0], ExactnessFailure::NonzeroPeriod { .. }));

        let mut g = TrigPForm::<Q>::zero(2, 0, 1);
        g.add_term(fr(&[1, 0], &[]), MultiIndex::single(1), Q::i()).unwrap();
        g.add_term(fr(&[0, 1], &[]), MultiIndex::single(2), Q::i()).unwrap();
        let cert = g.is_exact(&t);
        assert!(cert.exact);
        let v = cert.primitive.unwrap();
        assert_eq!(v.exterior_derivative(), g);
        assert_eq!(v.num_frequencies(), 2);
    }

    #[test]
    fn non_closed_form_is_rejected() {
        let t = Tolerances::default();
        let mut g = TrigPForm::<Q>::zero(2, 0, 1);
        g.add_term(fr(&[1, 0], &[]), MultiIndex::single(2), Q::one()).unwrap();
        let cert = g.is_exact(&t);
        assert!(!cert.exact);
        assert!(matches!(cert.failures[0], ExactnessFailure::NotClosed { .. }));
    }

    #[test]
    fn json_round_trip_exact_and_float() {
        let mut u = TrigPForm::<Q>::zero(2, 1, 1);
        let half = Q::from_rationals(
            &num_rational::BigRational::new(1.into(), 2.into()),
            &num_rational::BigRational::new((-3).into(), 7.into()),
        );
        u.add_term(fr(&[1, -2], &[1_000_000_000_000_000_000_000_000]), MultiIndex::single(2), half).unwrap();
        let j = u.to_json();
        assert_eq!(j["terms"][0]["re"], "1/2");
        assert_eq!(j["terms"][0]["xi"][0], "1000000000000000000000000");
        assert_eq!(TrigPForm::<Q>::from_json(&j).unwrap(), u);

        let mut w = TrigPForm::<C64>::zero(1, 1, 0);
        w.add_term(fr(&[3], &[-1]), MultiIndex::EMPTY, C64::new(0.25, -1.5)).unwrap();
        assert_eq!(TrigPForm::<C64>::from_json(&w.to_json()).unwrap(), w);
        assert!(TrigPForm::<C64>::from_json(&json!({"n": 1})).is_err());
    }

    #[test]
    fn hermitian_symmetry() {
        let t = Tolerances::default();
        let mut u = TrigPForm::<C64>::zero(1, 1, 0);
        u.add_term(fr(&[1], &[2]), MultiIndex::EMPTY, C64::new(1.0, 2.0)).unwrap();
        assert!(!u.is_real_valued(&t));
        u.add_term(fr(&[-1], &[-2]), MultiIndex::EMPTY, C64::new(1.0, -2.0)).unwrap();
        assert!(u.is_real_valued(&t));
    }
}
