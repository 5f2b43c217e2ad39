use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{ConstPForm, Freq, TrigPForm};
use crate::normal_form::trig_poly::TrigPoly;
use crate::scalar::{Real, Scalar, Tolerance};
use crate::symbols::{Coef, SystemSpec};

/// One coefficient `c_j(t)` multiplying `P_j(D_x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientEntry<S> {
    Constant(S),
    /// Function of `t_j` alone, stored as a one-variable polynomial.
    Decoupled(TrigPoly<S>),
    /// Function on all of `Tⁿ`.
    General(TrigPoly<S>),
}

/// `c(t, ξ) = Σ_j c_j(t) p_j(ξ) dt_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientProfile<S> {
    pub n: usize,
    pub entries: Vec<CoefficientEntry<S>>,
}

pub(crate) fn coef_of<S: Scalar>(v: &S) -> Coef {
    match (v.re().to_rational(), v.im().to_rational()) {
        (Some(a), Some(b)) if S::EXACT => Coef::Exact(a, b),
        _ => Coef::Float(v.to_c64()),
    }
}

impl<S: Scalar> CoefficientProfile<S> {
    /// All `c_j ≡ 1`: the constant-coefficient system itself.
    pub fn constant(n: usize) -> Self {
        CoefficientProfile { n, entries: vec![CoefficientEntry::Constant(S::one()); n] }
    }

    pub fn new(entries: Vec<CoefficientEntry<S>>) -> Result<Self> {
        let n = entries.len();
        for (j, e) in entries.iter().enumerate() {
            match e {
                CoefficientEntry::Decoupled(p) if p.n() != 1 => {
                    return Err(Error::domain(format!("decoupled c_{} must be a one-variable polynomial", j + 1)))
                }
                CoefficientEntry::General(p) if p.n() != n => {
                    return Err(Error::domain(format!("c_{} lives on T^{}, expected T^{n}", j + 1, p.n())))
                }
                _ => {}
            }
        }
        Ok(CoefficientProfile { n, entries })
    }

    /// `c_j` as a polynomial on `Tⁿ` (1-based `j`).
    pub fn full(&self, j: usize) -> TrigPoly<S> {
        match &self.entries[j - 1] {
            CoefficientEntry::Constant(c) => TrigPoly::constant(self.n, c.clone()),
            CoefficientEntry::Decoupled(p) => TrigPoly::in_variable(self.n, j, p).expect("validated"),
            CoefficientEntry::General(p) => p.clone(),
        }
    }

    /// `c_j(t_j)` when every coefficient depends on its own variable only.
    pub fn decoupled(&self) -> Option<Vec<TrigPoly<S>>> {
        (1..=self.n)
            .map(|j| {
                let f = self.full(j);
                f.depends_only_on(j).then(|| f.axis(j))
            })
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        (1..=self.n).all(|j| self.full(j).terms().all(|(k, _)| k.iter().all(|&v| v == 0)))
    }

    /// Mean values `c_{j0}`.
    pub fn means(&self) -> Vec<S> {
        (1..=self.n).map(|j| self.full(j).mean()).collect()
    }

    /// The normal-form system: symbols `c_{j0} p_j`.
    pub fn normal_form_spec(&self, spec: &SystemSpec) -> Result<SystemSpec> {
        if spec.n != self.n {
            return Err(Error::domain("profile and system disagree on n"));
        }
        SystemSpec::new(spec.symbols.iter().zip(self.means()).map(|(s, m)| s.scaled(coef_of(&m))).collect())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> CoefficientProfile<T> {
        CoefficientProfile {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| match e {
                    CoefficientEntry::Constant(c) => CoefficientEntry::Constant(f(c)),
                    CoefficientEntry::Decoupled(p) => CoefficientEntry::Decoupled(p.map(f)),
                    CoefficientEntry::General(p) => CoefficientEntry::General(p.map(f)),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .enumerate()
                .map(|(j, e)| match e {
                    CoefficientEntry::Constant(c) => json!({"j": j + 1, "kind": "constant", "value": {"re": c.re().to_json(), "im": c.im().to_json()}}),
                    CoefficientEntry::Decoupled(p) => json!({"j": j + 1, "kind": "decoupled", "terms": p.to_json()["terms"]}),
                    CoefficientEntry::General(p) => json!({"j": j + 1, "kind": "general", "terms": p.to_json()["terms"]}),
                })
                .collect(),
        )
    }

    /// Reads the `coefficients` array of a system spec. Constant entries are
    /// already folded into the symbols by [`SystemSpec::from_json`], so they
    /// appear here as `1`.
    pub fn from_system_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Parse("system.n missing".into()))? as usize;
        let mut entries = vec![CoefficientEntry::Constant(S::one()); n];
        for c in v.get("coefficients").and_then(Value::as_array).into_iter().flatten() {
            let j = c.get("j").and_then(Value::as_u64).ok_or_else(|| Error::Parse("coefficient without j".into()))? as usize;
            if j == 0 || j > n {
                return Err(Error::Parse(format!("coefficient index {j} outside 1..={n}")));
            }
            entries[j - 1] = match c.get("kind").and_then(Value::as_str) {
                Some("constant") => CoefficientEntry::Constant(S::one()),
                Some("decoupled") => CoefficientEntry::Decoupled(TrigPoly::from_json(c, 1)?),
                Some("general") => CoefficientEntry::General(TrigPoly::from_json(c, n)?),
                other => return Err(Error::Parse(format!("unknown coefficient kind {other:?}"))),
            };
        }
        Self::new(entries)
    }
}

/// Per-`ξ` data of the decomposition `c(t, ξ) = c_{ξ0} + d_t 𝒞_ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormSlice<S> {
    pub xi: Vec<i128>,
    pub p: Vec<S>,
    pub c0: Vec<S>,
    /// Zero-mean `𝒞_ξ`.
    pub cal: TrigPoly<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<S> {
    pub n: usize,
    pub big_n: usize,
    /// `c_j(t_j)` for decoupled profiles.
    pub decoupled: Option<Vec<TrigPoly<S>>>,
    pub slices: Vec<NormalFormSlice<S>>,
}

impl<S: Scalar> NormalForm<S> {
    pub fn slice(&self, xi: &[i128]) -> Option<&NormalFormSlice<S>> {
        self.slices.iter().find(|s| s.xi == xi)
    }

    /// For decoupled profiles, `(A_j, B_j)`: zero-mean primitives of `a_j − a_{j0}` and `b_j − b_{j0}`.
    pub fn decoupled_primitives(&self) -> Option<Vec<(TrigPoly<S>, TrigPoly<S>)>> {
        self.decoupled.as_ref().map(|cs| {
            cs.iter()
                .map(|c| {
                    let a = c.real_part().primitive(1).expect("one variable");
                    let b = c.imag_part().primitive(1).expect("one variable");
                    (a, b)
                })
                .collect()
        })
    }
}

/// `c(t, ξ)` componentwise: `p_j(ξ) c_j(t)`.
fn components<S: Scalar>(profile: &CoefficientProfile<S>, p: &[S]) -> Vec<TrigPoly<S>> {
    (1..=profile.n).map(|j| profile.full(j).scale(&p[j - 1])).collect()
}

fn closedness_failures<S: Scalar>(m: &[TrigPoly<S>], tol: &Tolerance) -> Vec<(usize, usize, f64)> {
    let scale = m.iter().map(|c| c.sup_coeff() * (c.bandwidth().max(1) as f64)).fold(0.0, f64::max);
    let mut out = Vec::new();
    for j in 1..=m.len() {
        for k in j + 1..=m.len() {
            let d = m[j - 1].derivative(k).sub(&m[k - 1].derivative(j));
            let bad = d.terms().map(|(_, v)| v.modulus()).fold(0.0, f64::max);
            if d.terms().any(|(_, v)| !tol.is_zero(v, scale)) {
                out.push((j, k, bad));
            }
        }
    }
    out
}

/// Checks `p_j(ξ) ∂_k c_j = p_k(ξ) ∂_j c_k` on every given `ξ`.
pub fn check_closedness<S: Scalar>(profile: &CoefficientProfile<S>, spec: &SystemSpec, xis: &[Vec<i128>], tol: &Tolerance) -> Result<()> {
    let fails: Vec<(Vec<i128>, usize, usize, f64)> = xis
        .par_iter()
        .map(|xi| -> Result<Vec<_>> {
            let p = spec.p_values::<S>(xi)?;
            Ok(closedness_failures(&components(profile, &p), tol).into_iter().map(|(j, k, r)| (xi.clone(), j, k, r)).collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if let Some((xi, j, k, r)) = fails.first() {
        return Err(Error::Closedness { count: fails.len(), first: format!("xi={xi:?} j={j} k={k} residual {r:e}") });
    }
    Ok(())
}

/// Solves `d_t 𝒞_ξ = c(t, ξ) − c_{ξ0}` coefficientwise for each `ξ`.
pub fn decompose<S: Scalar>(profile: &CoefficientProfile<S>, spec: &SystemSpec, xis: &[Vec<i128>], tol: &Tolerance) -> Result<NormalForm<S>> {
    if profile.n != spec.n {
        return Err(Error::domain("profile and system disagree on n"));
    }
    let slices = xis
        .par_iter()
        .map(|xi| -> Result<NormalFormSlice<S>> {
            let p = spec.p_values::<S>(xi)?;
            let m = components(profile, &p);
            let scale = m.iter().map(TrigPoly::sup_coeff).fold(0.0, f64::max);
            let c0: Vec<S> = m.iter().map(TrigPoly::mean).collect();
            let mut keys: Vec<Vec<i64>> = m.iter().flat_map(|c| c.terms().map(|(k, _)| k.clone())).collect();
            keys.sort();
            keys.dedup();
            let mut cal = TrigPoly::zero(profile.n);
            let mut bad = Vec::new();
            for k in keys.into_iter().filter(|k| k.iter().any(|&v| v != 0)) {
                let j = k.iter().position(|&v| v != 0).expect("nonzero k");
                let val = m[j].coeff(&k) / (S::i() * S::from_i128(k[j] as i128));
                for (jj, c) in m.iter().enumerate() {
                    let expect = S::i() * S::from_i128(k[jj] as i128) * val.clone();
                    if !tol.is_zero(&(c.coeff(&k) - expect), scale) {
                        bad.push((jj + 1, j + 1, k.clone()));
                    }
                }
                cal.add_term(k, val);
            }
            if let Some((a, b, k)) = bad.first() {
                return Err(Error::Closedness { count: bad.len(), first: format!("xi={xi:?} j={a} k={b} at t-frequency {k:?}") });
            }
            Ok(NormalFormSlice { xi: xi.clone(), p, c0, cal })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalForm { n: profile.n, big_n: spec.big_n, decoupled: profile.decoupled(), slices })
}

/// `𝕃^p u = d_t u + i c(t, D_x) ∧ u`, exact on coefficients.
pub fn apply_variable<S: Scalar>(profile: &CoefficientProfile<S>, spec: &SystemSpec, u: &TrigPForm<S>) -> Result<TrigPForm<S>> {
    if u.n() != spec.n || u.big_n() != spec.big_n || profile.n != spec.n {
        return Err(Error::domain("form, profile and system disagree on dimensions"));
    }
    let mut out = u.exterior_derivative();
    if u.degree() >= u.n() {
        return Ok(out);
    }
    let cs: Vec<TrigPoly<S>> = (1..=profile.n).map(|j| profile.full(j)).collect();
    let mut cache: Vec<(Vec<i128>, Vec<S>)> = Vec::new();
    for (f, v) in u.slices() {
        let p = match cache.iter().find(|(x, _)| *x == f.xi) {
            Some((_, p)) => p.clone(),
            None => {
                let p = spec.p_values::<S>(&f.xi)?;
                cache.push((f.xi.clone(), p.clone()));
                p
            }
        };
        for (j, c) in cs.iter().enumerate() {
            let dtj = ConstPForm::basis(spec.n, &[j + 1])?;
            let w = dtj.wedge(v)?;
            if w.is_zero() {
                continue;
            }
            for (k, ck) in c.terms() {
                let eta: Vec<i128> = f.eta.iter().zip(k).map(|(a, b)| a + *b as i128).collect();
                let coef = S::i() * p[j].clone() * ck.clone();
                out.add_slice(Freq::new(eta, f.xi.clone()), &w.scale(&coef))?;
            }
        }
    }
    Ok(out)
}
