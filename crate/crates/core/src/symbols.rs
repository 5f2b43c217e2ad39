//! Toroidal symbols `p_j : ℤᴺ → ℂ`, constant-coefficient systems and the
//! growth classifier used for decoupled systems.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{int_vec, ConstPForm, FrequencyBox};
use crate::scalar::{format_rational, parse_rational, rational_to_f64, Real, Scalar};
use crate::{GaussianRational, C64};

/// A complex coefficient, exact when it came from a rational literal.
#[derive(Clone, Debug, PartialEq)]
pub enum Coef {
    Exact(BigRational, BigRational),
    Float(C64),
}

impl Coef {
    pub fn real(r: BigRational) -> Self {
        Coef::Exact(r, BigRational::zero())
    }

    pub fn int(v: i64) -> Self {
        Coef::real(BigRational::from_integer(v.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Coef::real(BigRational::new(num.into(), den.into()))
    }

    pub fn exact(re: BigRational, im: BigRational) -> Self {
        Coef::Exact(re, im)
    }

    pub fn to_c64(&self) -> C64 {
        match self {
            Coef::Exact(a, b) => C64::new(rational_to_f64(a), rational_to_f64(b)),
            Coef::Float(z) => *z,
        }
    }

    pub fn to_exact(&self) -> Option<GaussianRational> {
        match self {
            Coef::Exact(a, b) => Some(Complex::new(a.clone(), b.clone())),
            Coef::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(a, b) => a.is_zero() && b.is_zero(),
            Coef::Float(z) => *z == C64::new(0.0, 0.0),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Coef::Exact(a, b) => json!({"re": format_rational(a), "im": format_rational(b)}),
            Coef::Float(z) => json!({"re": z.re, "im": z.im}),
        }
    }

    /// Parses `{re, im}` (strings or numbers, parsed exactly) or a bare value.
    pub fn from_json(v: &Value) -> Result<Self> {
        let part = |x: Option<&Value>| -> Result<BigRational> {
            match x {
                None | Some(Value::Null) => Ok(BigRational::zero()),
                Some(Value::String(s)) => parse_rational(s),
                Some(Value::Number(n)) => parse_rational(&n.to_string()),
                Some(other) => Err(Error::Parse(format!("bad coefficient part {other}"))),
            }
        };
        match v {
            Value::Object(_) => Ok(Coef::Exact(part(v.get("re"))?, part(v.get("im"))?)),
            _ => Ok(Coef::Exact(part(Some(v))?, BigRational::zero())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignCond {
    Any,
    Neg,
    NonPos,
    Zero,
    NonNeg,
    Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityCond {
    Any,
    Odd,
    Even,
}

/// Branch of a piecewise symbol on `ℤ` (first matching piece wins).
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub sign: SignCond,
    pub parity: ParityCond,
    pub value: SymbolKind,
}

impl Piece {
    fn matches(&self, x: i128) -> bool {
        let s = match self.sign {
            SignCond::Any => true,
            SignCond::Neg => x < 0,
            SignCond::NonPos => x <= 0,
            SignCond::Zero => x == 0,
            SignCond::NonNeg => x >= 0,
            SignCond::Pos => x > 0,
        };
        let p = match self.parity {
            ParityCond::Any => true,
            ParityCond::Odd => x.rem_euclid(2) == 1,
            ParityCond::Even => x.rem_euclid(2) == 0,
        };
        s && p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolKind {
    /// `Σ c_a ξ^a`; negative exponents allowed, terms with `0^{-k}` read as 0.
    Polynomial(Vec<(Coef, Vec<i32>)>),
    /// `c |ξ|^{ρ/μ}`, zero at `ξ = 0`.
    Homogeneous { c: Coef, rho: u32, mu: u32 },
    /// `c log(1 + |ξ|)`.
    Logarithmic(Coef),
    /// Explicit values; zero off the table.
    Tabulated(Vec<(Vec<i128>, Coef)>),
    /// Sign/parity dispatch, `N = 1` only; zero when no piece matches.
    Piecewise(Vec<Piece>),
    Sum(Vec<SymbolKind>),
    Scaled(Coef, Box<SymbolKind>),
}

fn pow_rat(base: &BigRational, e: i32) -> Option<BigRational> {
    if e >= 0 {
        Some(num_traits::pow(base.clone(), e as usize))
    } else if base.is_zero() {
        None
    } else {
        Some(num_traits::pow(base.recip(), (-e) as usize))
    }
}

fn euclid_sq(xi: &[i128]) -> BigInt {
    xi.iter().map(|&v| BigInt::from(v) * BigInt::from(v)).sum()
}

fn euclid(xi: &[i128]) -> f64 {
    xi.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
}

fn cmul(a: &GaussianRational, b: &GaussianRational) -> GaussianRational {
    a * b
}

impl SymbolKind {
    pub fn eval_c64(&self, xi: &[i128]) -> C64 {
        match self {
            SymbolKind::Polynomial(terms) => terms
                .iter()
                .map(|(c, e)| {
                    let mut m = 1.0f64;
                    for (&x, &k) in xi.iter().zip(e) {
                        if x == 0 && k < 0 {
                            return C64::new(0.0, 0.0);
                        }
                        m *= (x as f64).powi(k);
                    }
                    c.to_c64() * m
                })
                .sum(),
            SymbolKind::Homogeneous { c, rho, mu } => {
                let r = euclid(xi);
                if r == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    c.to_c64() * r.powf(*rho as f64 / *mu as f64)
                }
            }
            SymbolKind::Logarithmic(c) => c.to_c64() * (1.0 + euclid(xi)).ln(),
            SymbolKind::Tabulated(t) => t
                .iter()
                .find(|(k, _)| k.as_slice() == xi)
                .map(|(_, c)| c.to_c64())
                .unwrap_or_default(),
            SymbolKind::Piecewise(pieces) => match xi {
                [x] => pieces.iter().find(|p| p.matches(*x)).map(|p| p.value.eval_c64(xi)).unwrap_or_default(),
                _ => C64::new(f64::NAN, f64::NAN),
            },
            SymbolKind::Sum(parts) => parts.iter().map(|p| p.eval_c64(xi)).sum(),
            SymbolKind::Scaled(c, inner) => c.to_c64() * inner.eval_c64(xi),
        }
    }

    pub fn eval_exact(&self, xi: &[i128]) -> Result<GaussianRational> {
        let not_exact = |what: &str| Error::NotExact(format!("{what} at xi = {xi:?}"));
        let zero = || Complex::new(BigRational::zero(), BigRational::zero());
        match self {
            SymbolKind::Polynomial(terms) => {
                let mut acc = zero();
                'term: for (c, e) in terms {
                    let c = c.to_exact().ok_or_else(|| not_exact("float coefficient"))?;
                    let mut m = BigRational::one();
                    for (&x, &k) in xi.iter().zip(e) {
                        match pow_rat(&BigRational::from_integer(x.into()), k) {
                            Some(v) => m *= v,
                            None => continue 'term,
                        }
                    }
                    acc += c * Complex::new(m, BigRational::zero());
                }
                Ok(acc)
            }
            SymbolKind::Homogeneous { c, rho, mu } => {
                let s = euclid_sq(xi);
                if s.is_zero() {
                    return Ok(zero());
                }
                let c = c.to_exact().ok_or_else(|| not_exact("float coefficient"))?;
                let root = s.nth_root(2 * mu);
                if num_traits::pow(root.clone(), 2 * *mu as usize) != s {
                    return Err(not_exact("irrational power"));
                }
                let v = BigRational::from_integer(num_traits::pow(root, *rho as usize));
                Ok(c * Complex::new(v, BigRational::zero()))
            }
            SymbolKind::Logarithmic(_) => {
                if xi.iter().all(|&v| v == 0) {
                    Ok(zero())
                } else {
                    Err(not_exact("logarithm"))
                }
            }
            SymbolKind::Tabulated(t) => match t.iter().find(|(k, _)| k.as_slice() == xi) {
                Some((_, c)) => c.to_exact().ok_or_else(|| not_exact("float table entry")),
                None => Ok(zero()),
            },
            SymbolKind::Piecewise(pieces) => match xi {
                [x] => match pieces.iter().find(|p| p.matches(*x)) {
                    Some(p) => p.value.eval_exact(xi),
                    None => Ok(zero()),
                },
                _ => Err(Error::domain("piecewise symbols need N = 1")),
            },
            SymbolKind::Sum(parts) => {
                let mut acc = zero();
                for p in parts {
                    acc += p.eval_exact(xi)?;
                }
                Ok(acc)
            }
            SymbolKind::Scaled(c, inner) => {
                let c = c.to_exact().ok_or_else(|| not_exact("float coefficient"))?;
                Ok(cmul(&c, &inner.eval_exact(xi)?))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SymbolKind::Polynomial(terms) => json!({
                "kind": "polynomial",
                "terms": terms.iter().map(|(c, e)| json!({"coeff": c.to_json(), "exps": e})).collect::<Vec<_>>(),
            }),
            SymbolKind::Homogeneous { c, rho, mu } => json!({"kind": "homogeneous", "c": c.to_json(), "rho": rho, "mu": mu}),
            SymbolKind::Logarithmic(c) => json!({"kind": "logarithmic", "c": c.to_json()}),
            SymbolKind::Tabulated(t) => json!({
                "kind": "tabulated",
                "entries": t.iter().map(|(x, c)| json!({"xi": x.iter().map(|v| v.to_string()).collect::<Vec<_>>(), "value": c.to_json()})).collect::<Vec<_>>(),
            }),
            SymbolKind::Piecewise(ps) => json!({
                "kind": "piecewise",
                "pieces": ps.iter().map(|p| json!({"sign": p.sign, "parity": p.parity, "value": p.value.to_json()})).collect::<Vec<_>>(),
            }),
            SymbolKind::Sum(parts) => json!({"kind": "sum", "parts": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>()}),
            SymbolKind::Scaled(c, inner) => json!({"kind": "scaled", "c": c.to_json(), "inner": inner.to_json()}),
        }
    }

    pub fn from_json(v: &Value, big_n: usize) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("symbol without kind".into()))?;
        let coef = |key: &str| Coef::from_json(v.get(key).unwrap_or(&Value::from(1)));
        match kind {
            "polynomial" => {
                let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| Error::Parse("polynomial needs terms".into()))?;
                let mut out = Vec::new();
                for t in terms {
                    let c = Coef::from_json(t.get("coeff").unwrap_or(&Value::from(1)))?;
                    let e: Vec<i32> = serde_json::from_value(t.get("exps").cloned().unwrap_or(Value::Null))
                        .map_err(|e| Error::Parse(format!("polynomial exps: {e}")))?;
                    if e.len() != big_n {
                        return Err(Error::Parse(format!("exps has length {}, expected N = {big_n}", e.len())));
                    }
                    out.push((c, e));
                }
                Ok(SymbolKind::Polynomial(out))
            }
            "linear" => {
                // shorthand: Σ_k a_k ξ_k
                let a = v.get("a").and_then(Value::as_array).ok_or_else(|| Error::Parse("linear needs a".into()))?;
                if a.len() != big_n {
                    return Err(Error::Parse("linear coefficient length must equal N".into()));
                }
                let mut out = Vec::new();
                for (k, c) in a.iter().enumerate() {
                    let mut e = vec![0; big_n];
                    e[k] = 1;
                    out.push((Coef::from_json(c)?, e));
                }
                Ok(SymbolKind::Polynomial(out))
            }
            "homogeneous" => {
                let rho = v.get("rho").and_then(Value::as_u64).ok_or_else(|| Error::Parse("homogeneous needs rho".into()))? as u32;
                let mu = v.get("mu").and_then(Value::as_u64).ok_or_else(|| Error::Parse("homogeneous needs mu".into()))? as u32;
                if rho == 0 || mu == 0 || num_integer::gcd(rho, mu) != 1 {
                    return Err(Error::Parse(format!("kappa = {rho}/{mu} must be positive and in lowest terms")));
                }
                Ok(SymbolKind::Homogeneous { c: coef("c")?, rho, mu })
            }
            "logarithmic" => Ok(SymbolKind::Logarithmic(coef("c")?)),
            "tabulated" => {
                let entries = v.get("entries").and_then(Value::as_array).ok_or_else(|| Error::Parse("tabulated needs entries".into()))?;
                let mut out = Vec::new();
                for e in entries {
                    let xi = int_vec(e.get("xi"))?;
                    if xi.len() != big_n {
                        return Err(Error::Parse("table entry has wrong dimension".into()));
                    }
                    out.push((xi, Coef::from_json(e.get("value").unwrap_or(&Value::from(0)))?));
                }
                Ok(SymbolKind::Tabulated(out))
            }
            "piecewise" => {
                if big_n != 1 {
                    return Err(Error::Parse("piecewise symbols need N = 1".into()));
                }
                let pieces = v.get("pieces").and_then(Value::as_array).ok_or_else(|| Error::Parse("piecewise needs pieces".into()))?;
                let mut out = Vec::new();
                for p in pieces {
                    let sign = match p.get("sign").and_then(Value::as_str).unwrap_or("any") {
                        "any" => SignCond::Any,
                        "neg" => SignCond::Neg,
                        "nonpos" => SignCond::NonPos,
                        "zero" => SignCond::Zero,
                        "nonneg" => SignCond::NonNeg,
                        "pos" => SignCond::Pos,
                        s => return Err(Error::Parse(format!("unknown sign condition {s:?}"))),
                    };
                    let parity = match p.get("parity").and_then(Value::as_str).unwrap_or("any") {
                        "any" => ParityCond::Any,
                        "odd" => ParityCond::Odd,
                        "even" => ParityCond::Even,
                        s => return Err(Error::Parse(format!("unknown parity condition {s:?}"))),
                    };
                    let value = SymbolKind::from_json(p.get("value").ok_or_else(|| Error::Parse("piece without value".into()))?, big_n)?;
                    out.push(Piece { sign, parity, value });
                }
                Ok(SymbolKind::Piecewise(out))
            }
            "sum" => {
                let parts = v.get("parts").and_then(Value::as_array).ok_or_else(|| Error::Parse("sum needs parts".into()))?;
                Ok(SymbolKind::Sum(parts.iter().map(|p| SymbolKind::from_json(p, big_n)).collect::<Result<_>>()?))
            }
            "scaled" => {
                let inner = SymbolKind::from_json(v.get("inner").ok_or_else(|| Error::Parse("scaled needs inner".into()))?, big_n)?;
                Ok(SymbolKind::Scaled(coef("c")?, Box::new(inner)))
            }
            other => Err(Error::Parse(format!("unknown symbol kind {other:?}"))),
        }
    }
}

/// A symbol with its declared order `m`: `|p(ξ)| ≤ C ⟨ξ⟩^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToroidalSymbol {
    pub big_n: usize,
    pub order: f64,
    pub kind: SymbolKind,
}

impl ToroidalSymbol {
    pub fn new(big_n: usize, order: f64, kind: SymbolKind) -> Self {
        ToroidalSymbol { big_n, order, kind }
    }

    pub fn zero(big_n: usize) -> Self {
        Self::new(big_n, 0.0, SymbolKind::Polynomial(vec![]))
    }

    pub fn constant(big_n: usize, c: Coef) -> Self {
        Self::new(big_n, 0.0, SymbolKind::Polynomial(vec![(c, vec![0; big_n])]))
    }

    /// `Σ_k a_k ξ_k`.
    pub fn linear(a: Vec<Coef>) -> Self {
        let big_n = a.len();
        let terms = a
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let mut e = vec![0; big_n];
                e[k] = 1;
                (c, e)
            })
            .collect();
        Self::new(big_n, 1.0, SymbolKind::Polynomial(terms))
    }

    /// Univariate polynomial `Σ c_k ξ^k` (N = 1).
    pub fn poly1(coeffs: Vec<Coef>) -> Self {
        let order = coeffs.len().saturating_sub(1) as f64;
        let terms = coeffs.into_iter().enumerate().map(|(k, c)| (c, vec![k as i32])).collect();
        Self::new(1, order, SymbolKind::Polynomial(terms))
    }

    pub fn homogeneous(c: Coef, rho: u32, mu: u32) -> Result<Self> {
        if rho == 0 || mu == 0 || num_integer::gcd(rho, mu) != 1 {
            return Err(Error::domain(format!("kappa = {rho}/{mu} must be positive and in lowest terms")));
        }
        Ok(Self::new(1, rho as f64 / mu as f64, SymbolKind::Homogeneous { c, rho, mu }))
    }

    pub fn logarithmic(big_n: usize, c: Coef) -> Self {
        // log grows slower than any power; order 0 up to the log factor
        Self::new(big_n, 1e-3, SymbolKind::Logarithmic(c))
    }

    pub fn scaled(&self, c: Coef) -> Self {
        Self::new(self.big_n, self.order, SymbolKind::Scaled(c, Box::new(self.kind.clone())))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::new(self.big_n, self.order.max(other.order), SymbolKind::Sum(vec![self.kind.clone(), other.kind.clone()]))
    }

    pub fn eval_c64(&self, xi: &[i128]) -> C64 {
        self.kind.eval_c64(xi)
    }

    pub fn eval_exact(&self, xi: &[i128]) -> Result<GaussianRational> {
        self.kind.eval_exact(xi)
    }

    /// Value in the scalar field `S`; exact fields require an exact evaluator.
    pub fn eval<S: Scalar>(&self, xi: &[i128]) -> Result<S> {
        if S::EXACT {
            let z = self.eval_exact(xi)?;
            Ok(S::from_rationals(&z.re, &z.im))
        } else {
            Ok(S::from_c64(self.eval_c64(xi)))
        }
    }

    /// `max |p(ξ)| / ⟨ξ⟩^m` over the box.
    pub fn order_constant(&self, b: &FrequencyBox) -> f64 {
        FrequencyBox::cube(self.big_n, b.x)
            .iter()
            .map(|xi| {
                let br = (1.0 + euclid(xi).powi(2)).sqrt();
                self.eval_c64(xi).norm() / br.powf(self.order)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.kind.to_json();
        v["order"] = json!(self.order);
        v
    }

    pub fn from_json(v: &Value, big_n: usize) -> Result<Self> {
        let kind = SymbolKind::from_json(v, big_n)?;
        let order = match v.get("order") {
            Some(o) => o.as_f64().ok_or_else(|| Error::Parse("order must be a number".into()))?,
            None => default_order(&kind),
        };
        Ok(Self::new(big_n, order, kind))
    }
}

fn default_order(kind: &SymbolKind) -> f64 {
    match kind {
        SymbolKind::Polynomial(t) => t.iter().map(|(_, e)| e.iter().map(|&k| k.max(0)).sum::<i32>() as f64).fold(0.0, f64::max),
        SymbolKind::Homogeneous { rho, mu, .. } => *rho as f64 / *mu as f64,
        SymbolKind::Logarithmic(_) => 1e-3,
        SymbolKind::Tabulated(_) => 0.0,
        SymbolKind::Piecewise(p) => p.iter().map(|p| default_order(&p.value)).fold(0.0, f64::max),
        SymbolKind::Sum(p) => p.iter().map(default_order).fold(0.0, f64::max),
        SymbolKind::Scaled(_, inner) => default_order(inner),
    }
}

/// Constant-coefficient system `L_j = D_{t_j} + p_j(D_x)` on `T^{n+N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub n: usize,
    pub big_n: usize,
    pub symbols: Vec<ToroidalSymbol>,
}

impl SystemSpec {
    pub fn new(symbols: Vec<ToroidalSymbol>) -> Result<Self> {
        let n = symbols.len();
        if n == 0 {
            return Err(Error::domain("system needs at least one symbol"));
        }
        let big_n = symbols[0].big_n;
        if symbols.iter().any(|s| s.big_n != big_n) {
            return Err(Error::domain("symbols disagree on N"));
        }
        Ok(SystemSpec { n, big_n, symbols })
    }

    /// `p_j(ξ) = a_j ξ` for `N = 1`: the system `d_t + a ∧ ∂_x`.
    pub fn linear_1d(a: Vec<Coef>) -> Result<Self> {
        Self::new(a.into_iter().map(|c| ToroidalSymbol::linear(vec![c])).collect())
    }

    pub fn p_values<S: Scalar>(&self, xi: &[i128]) -> Result<Vec<S>> {
        self.symbols.iter().map(|s| s.eval::<S>(xi)).collect()
    }

    pub fn p_values_c64(&self, xi: &[i128]) -> Vec<C64> {
        self.symbols.iter().map(|s| s.eval_c64(xi)).collect()
    }

    pub fn all_exact(&self, xi: &[i128]) -> bool {
        self.symbols.iter().all(|s| s.eval_exact(xi).is_ok())
    }

    /// `{n, N, symbols: [...]}`; constant coefficients are folded in.
    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "N": self.big_n, "symbols": self.symbols.iter().map(|s| s.to_json()).collect::<Vec<_>>()})
    }

    /// Parses symbols and folds any `kind: "constant"` coefficients into them.
    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Parse("system.n missing".into()))? as usize;
        let big_n = v.get("N").and_then(Value::as_u64).ok_or_else(|| Error::Parse("system.N missing".into()))? as usize;
        let syms = v.get("symbols").and_then(Value::as_array).ok_or_else(|| Error::Parse("system.symbols missing".into()))?;
        if syms.len() != n {
            return Err(Error::Parse(format!("{} symbols given for n = {n}", syms.len())));
        }
        let mut symbols = syms
            .iter()
            .enumerate()
            .map(|(j, s)| ToroidalSymbol::from_json(s, big_n).map_err(|e| Error::Parse(format!("symbols[{j}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(cs) = v.get("coefficients").and_then(Value::as_array) {
            for c in cs {
                if c.get("kind").and_then(Value::as_str) == Some("constant") {
                    let j = c.get("j").and_then(Value::as_u64).ok_or_else(|| Error::Parse("coefficient without j".into()))? as usize;
                    if j == 0 || j > n {
                        return Err(Error::Parse(format!("coefficient index {j} outside 1..={n}")));
                    }
                    let val = Coef::from_json(c.get("value").unwrap_or(&Value::from(1)))?;
                    symbols[j - 1] = symbols[j - 1].scaled(val);
                }
            }
        }
        Self::new(symbols)
    }
}

/// The slice `L̂(η, ξ) = i Σ_j (η_j + p_j(ξ)) dt_j`.
pub fn eval_symbol_slice<S: Scalar>(spec: &SystemSpec, eta: &[i128], xi: &[i128]) -> Result<ConstPForm<S>> {
    if eta.len() != spec.n || xi.len() != spec.big_n {
        return Err(Error::domain("frequency does not match the system dimensions"));
    }
    let p = spec.p_values::<S>(xi)?;
    Ok(slice_from_values(eta, &p))
}

pub fn slice_from_values<S: Scalar>(eta: &[i128], p: &[S]) -> ConstPForm<S> {
    ConstPForm::one_form(eta.iter().zip(p).map(|(&e, pj)| S::i() * (S::from_i128(e) + pj.clone())).collect())
}

/// `‖L̂‖ = max_j |η_j + p_j(ξ)|`.
pub fn slice_norm<S: Scalar>(l: &ConstPForm<S>) -> f64 {
    l.sup_norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTag {
    Log,
    Superlog,
}

/// Finite-box growth verdict; heuristic by nature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthClass {
    pub tag: GrowthTag,
    /// `C` with `|φ(ξ)| ≤ C log|ξ|` on the box (log case).
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub n0: Option<u64>,
    /// Outer-half max of `|φ|/log|ξ|` over its median on the whole range.
    pub ratio_statistic: f64,
    /// Least-squares fit of `|φ(ξ)| ≈ C log|ξ|`.
    pub c_lsq: f64,
    pub heuristic: bool,
}

pub fn classify_growth(phi: &ToroidalSymbol, b: &FrequencyBox, margin: f64) -> Result<GrowthClass> {
    classify_growth_fn(phi.big_n, |xi| phi.eval_c64(xi).norm(), b, margin)
}

/// Sample points `2 ≤ |ξ| ≤ X`: the whole shell set when small, else axes and diagonals.
fn growth_samples(big_n: usize, x: u64) -> Vec<Vec<i128>> {
    let n0 = 2i128;
    let total = (2.0 * x as f64 + 1.0).powi(big_n as i32);
    if total <= 2e5 {
        return FrequencyBox::cube(big_n, x)
            .into_iter()
            .filter(|v| v.iter().map(|a| a.abs()).max().unwrap_or(0) >= n0)
            .collect();
    }
    let mut out = Vec::new();
    for s in n0..=x as i128 {
        for k in 0..big_n {
            for sg in [-1, 1] {
                let mut v = vec![0; big_n];
                v[k] = sg * s;
                out.push(v);
            }
        }
        out.push(vec![s; big_n]);
        out.push(vec![-s; big_n]);
    }
    out
}

pub fn classify_growth_fn(big_n: usize, phi: impl Fn(&[i128]) -> f64, b: &FrequencyBox, margin: f64) -> Result<GrowthClass> {
    if b.x < 16 {
        return Err(Error::domain(format!("growth classification needs X ≥ 16, got {}", b.x)));
    }
    if margin.is_nan() || margin < 0.0 {
        return Err(Error::domain("margin must be nonnegative"));
    }
    let pts = growth_samples(big_n, b.x);
    let mut all = Vec::with_capacity(pts.len());
    let mut outer_max = 0.0f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for xi in &pts {
        let r = xi.iter().map(|a| a.unsigned_abs()).max().unwrap() as f64;
        let lg = r.ln();
        let v = phi(xi);
        if !v.is_finite() {
            return Err(Error::domain(format!("symbol not finite at {xi:?}")));
        }
        let ratio = v / lg;
        all.push(ratio);
        if 2.0 * r >= b.x as f64 {
            outer_max = outer_max.max(ratio);
        }
        sxy += v * lg;
        sxx += lg * lg;
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = all[all.len() / 2];
    let stat = if outer_max == 0.0 {
        0.0
    } else if median == 0.0 {
        f64::INFINITY
    } else {
        outer_max / median
    };
    let is_log = stat <= 1.0 + margin;
    let cmax = all.last().copied().unwrap_or(0.0);
    Ok(GrowthClass {
        tag: if is_log { GrowthTag::Log } else { GrowthTag::Superlog },
        c: is_log.then_some(cmax),
        n0: is_log.then_some(2),
        ratio_statistic: stat,
        c_lsq: if sxx > 0.0 { sxy / sxx } else { 0.0 },
        heuristic: true,
    })
}

/// Integer part test helper shared by the sector logic: exact integer value of `z`, if any.
pub fn exact_integer(z: &GaussianRational) -> Option<i128> {
    if !z.im.is_zero() || !z.re.is_integer() {
        return None;
    }
    z.re.to_integer().to_i128()
}

/// Nearest-integer test in float mode: `|Re z - m| ≤ eps` and `|Im z| ≤ eps`.
pub fn near_integer(z: C64, eps: f64) -> Option<i128> {
    let m = z.re.round();
    if (z.re - m).abs() <= eps && z.im.abs() <= eps && m.abs() < 1e30 {
        Some(m as i128)
    } else {
        None
    }
}

/// Integer vector `m` with `p_j(ξ) = m_j` for all `j`, when `c_{ξ0}` is integral.
pub fn integral_part<S: Scalar>(p: &[S], eps: f64) -> Option<Vec<i128>> {
    p.iter()
        .map(|z| {
            if S::EXACT {
                let re = z.re().to_rational()?;
                let im = z.im().to_rational()?;
                exact_integer(&Complex::new(re, im))
            } else {
                near_integer(z.to_c64(), eps)
            }
        })
        .collect()
}

/// Sign helper for exact rationals used by callers that inspect symbol signs.
pub fn rational_sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Coef {
        Coef::ratio(n, d)
    }

    #[test]
    fn slice_examples() {
        let spec = SystemSpec::linear_1d(vec![q(1, 1)]).unwrap();
        let l = eval_symbol_slice::<GaussianRational>(&spec, &[2], &[-2]).unwrap();
        assert!(l.is_zero());

        let zero = SystemSpec::new(vec![ToroidalSymbol::zero(1), ToroidalSymbol::zero(1)]).unwrap();
        let l = eval_symbol_slice::<GaussianRational>(&zero, &[3, -1], &[0]).unwrap();
        assert_eq!(l.component(1), GaussianRational::i() * GaussianRational::from_i128(3));
        assert_eq!(l.component(2), -GaussianRational::i());
        assert_eq!(slice_norm(&l), 3.0);

        let spec = SystemSpec::linear_1d(vec![q(1, 2), q(1, 3)]).unwrap();
        let l = eval_symbol_slice::<GaussianRational>(&spec, &[-1, -1], &[2]).unwrap();
        assert_eq!(l.component(1), GaussianRational::zero());
        let third = BigRational::new((-1).into(), 3.into());
        assert_eq!(l.component(2), Complex::new(BigRational::zero(), third));
    }

    #[test]
    fn slice_norm_examples() {
        let l = ConstPForm::one_form(vec![C64::new(0.0, 0.5), C64::new(0.0, -1.75)]);
        assert_eq!(slice_norm(&l), 1.75);
        assert_eq!(slice_norm(&ConstPForm::<C64>::zero(2, 1)), 0.0);
    }

    #[test]
    fn homogeneous_scaling_exact() {
        // κ = 1/2 on squares: p(4ξ) = 2 p(ξ) for ξ = k²
        let s = ToroidalSymbol::homogeneous(q(3, 1), 1, 2).unwrap();
        for k in 1..20i128 {
            let a = s.eval_exact(&[k * k]).unwrap();
            let b = s.eval_exact(&[4 * k * k]).unwrap();
            assert_eq!(b, a * GaussianRational::from_i128(2));
        }
        assert!(s.eval_exact(&[2]).is_err());
        assert_eq!(s.eval_exact(&[0]).unwrap(), GaussianRational::zero());
        let k1 = ToroidalSymbol::homogeneous(q(1, 1), 1, 1).unwrap();
        assert_eq!(k1.eval_exact(&[-7]).unwrap(), GaussianRational::from_i128(7));
        assert!(ToroidalSymbol::homogeneous(q(1, 1), 2, 4).is_err());
    }

    #[test]
    fn growth_examples() {
        let b = FrequencyBox::new(0, 1000);
        let log = ToroidalSymbol::logarithmic(1, q(1, 1));
        assert_eq!(classify_growth(&log, &b, 0.25).unwrap().tag, GrowthTag::Log);
        let lin = ToroidalSymbol::linear(vec![q(1, 1)]);
        assert_eq!(classify_growth(&lin, &b, 0.25).unwrap().tag, GrowthTag::Superlog);
        let c = ToroidalSymbol::constant(1, q(5, 1));
        let g = classify_growth(&c, &b, 0.25).unwrap();
        assert_eq!(g.tag, GrowthTag::Log);
        assert!(g.c.unwrap() >= 5.0 / (1000f64).ln());
        assert!(classify_growth(&c, &FrequencyBox::new(0, 8), 0.25).is_err());
    }

    #[test]
    fn order_bound_holds_on_box() {
        let b = FrequencyBox::new(0, 50);
        let s = ToroidalSymbol::poly1(vec![q(1, 1), q(0, 1), q(3, 1)]);
        let c = s.order_constant(&b);
        for x in -50..=50i128 {
            let br = (1.0 + (x * x) as f64).sqrt();
            assert!(s.eval_c64(&[x]).norm() <= c * br.powf(2.0) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn piecewise_parity_symbol() {
        let alpha = SymbolKind::Piecewise(vec![
            Piece { sign: SignCond::Neg, parity: ParityCond::Odd, value: SymbolKind::Polynomial(vec![(q(1, 1), vec![-1])]) },
            Piece { sign: SignCond::NonPos, parity: ParityCond::Even, value: SymbolKind::Polynomial(vec![(q(-1, 1), vec![1])]) },
        ]);
        assert_eq!(alpha.eval_c64(&[-3]), C64::new(-1.0 / 3.0, 0.0));
        assert_eq!(alpha.eval_c64(&[-4]), C64::new(4.0, 0.0));
        assert_eq!(alpha.eval_c64(&[5]), C64::new(0.0, 0.0));
        let back = SymbolKind::from_json(&alpha.to_json(), 1).unwrap();
        assert_eq!(back, alpha);
    }

    #[test]
    fn spec_json_folds_constants() {
        let v = json!({
            "n": 2, "N": 1,
            "symbols": [{"kind": "linear", "a": ["1"]}, {"kind": "polynomial", "terms": [{"coeff": {"re": "2", "im": "0"}, "exps": [0]}]}],
            "coefficients": [{"j": 1, "kind": "constant", "value": {"re": "1/2", "im": "0"}}]
        });
        let s = SystemSpec::from_json(&v).unwrap();
        assert_eq!(s.symbols[0].eval_exact(&[4]).unwrap(), GaussianRational::from_i128(2));
        assert_eq!(s.symbols[1].eval_exact(&[9]).unwrap(), GaussianRational::from_i128(2));
        assert!(SystemSpec::from_json(&json!({"n": 2, "N": 1, "symbols": []})).is_err());
    }

    #[test]
    fn integrality() {
        let p = vec![GaussianRational::from_i128(3), GaussianRational::from_i128(-2)];
        assert_eq!(integral_part(&p, 0.0), Some(vec![3, -2]));
        let p = vec![C64::new(3.0 + 1e-12, 0.0), C64::new(1.0, 1e-3)];
        assert_eq!(integral_part(&p, 1e-9), None);
        assert_eq!(integral_part(&p[..1], 1e-9), Some(vec![3]));
    }
}
