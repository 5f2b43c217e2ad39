use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diophantine::cfrac::{lcm_denominators, max_abs_error};
use crate::diophantine::interval::RealInterval;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_to_f64};

pub(crate) fn log10_rational(q: &BigRational) -> f64 {
    let v = rational_to_f64(q);
    if v > 0.0 && v.is_finite() {
        return v.log10();
    }
    // out of f64 range: digit counts
    let n = q.numer().magnitude().to_string();
    let d = q.denom().to_string();
    let lead = |s: &str| s[..s.len().min(15)].parse::<f64>().unwrap().log10() - (s.len().min(15) as f64 - 1.0);
    (n.len() as f64 - 1.0 + lead(&n)) - (d.len() as f64 - 1.0 + lead(&d))
}

/// Lower bound data for a rational `α` with least common denominator `q0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalLowerBound {
    pub q0: BigInt,
    /// `min_{1 ≤ r < q0} dist_∞(rα, ℤⁿ)`: the smallest nonzero `‖L̂(η, ξ)‖` of `d_t + α∧∂_x`.
    pub c0: Option<BigRational>,
    pub c0_argmin: Option<u64>,
    /// `min_{1 ≤ r < q0} dist_∞(α, r^{-1}ℤⁿ) = min dist_∞(rα, ℤⁿ) / r`.
    pub c0_scaled: Option<BigRational>,
}

impl RationalLowerBound {
    pub fn to_json(&self) -> Value {
        json!({
            "q0": self.q0.to_string(),
            "C0": self.c0.as_ref().map(format_rational),
            "C0_argmin_r": self.c0_argmin,
            "C0_scaled": self.c0_scaled.as_ref().map(format_rational),
            "infinite": self.c0.is_none(),
        })
    }
}

fn dist_to_int(x: &BigRational) -> BigRational {
    (x - x.round()).abs()
}

fn dist_sup(alpha: &[BigRational], r: &BigRational) -> BigRational {
    alpha.iter().map(|a| dist_to_int(&(a * r))).max().unwrap_or_else(BigRational::zero)
}

/// Exact `C₀`; `None` (+∞) when `q0 = 1`.
pub fn rational_lowerbound(alpha: &[BigRational]) -> Result<RationalLowerBound> {
    let q0 = lcm_denominators(alpha);
    lower_bound_with(alpha, q0)
}

/// The same quantity for `α^μ` (componentwise), enumerating `r < q0^μ`.
pub fn rational_lowerbound_mu(alpha: &[BigRational], mu: u32) -> Result<RationalLowerBound> {
    if mu == 0 {
        return Err(Error::domain("mu must be positive"));
    }
    let am: Vec<BigRational> = alpha.iter().map(|a| num_traits::pow(a.clone(), mu as usize)).collect();
    let q0 = num_traits::pow(lcm_denominators(alpha), mu as usize);
    lower_bound_with(&am, q0)
}

fn lower_bound_with(alpha: &[BigRational], q0: BigInt) -> Result<RationalLowerBound> {
    let qn = q0.to_u64().filter(|&q| q <= 10_000_000).ok_or_else(|| Error::Resource(format!("q0 = {q0} too large to enumerate")))?;
    if qn == 1 {
        return Ok(RationalLowerBound { q0, c0: None, c0_argmin: None, c0_scaled: None });
    }
    let mut best: Option<(BigRational, u64)> = None;
    let mut best_scaled: Option<BigRational> = None;
    for r in 1..qn {
        let rq = BigRational::from_integer(r.into());
        let d = dist_sup(alpha, &rq);
        let s = &d / &rq;
        if best.as_ref().is_none_or(|(b, _)| &d < b) {
            best = Some((d, r));
        }
        if best_scaled.as_ref().is_none_or(|b| &s < b) {
            best_scaled = Some(s);
        }
    }
    let (c0, arg) = best.unzip();
    Ok(RationalLowerBound { q0, c0, c0_argmin: arg, c0_scaled: best_scaled })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdaOptions {
    pub mu: u32,
    pub q_max: u64,
    pub ell_target: usize,
    pub c: BigRational,
    /// Structured denominators tried with multipliers `1..=seed_multipliers`.
    pub seeds: Vec<BigInt>,
    pub seed_multipliers: u64,
}

impl Default for SdaOptions {
    fn default() -> Self {
        SdaOptions { mu: 1, q_max: 10_000, ell_target: 3, c: BigRational::one(), seeds: vec![], seed_multipliers: 64 }
    }
}

/// Best numerators for one denominator with the certified error.
#[derive(Clone, Debug, PartialEq)]
pub struct SdaCandidate {
    pub q: BigInt,
    pub p: Vec<BigInt>,
    /// Certified `max_j |α_j^μ − p_j^μ / q|` over the input intervals.
    pub err: BigRational,
}

impl SdaCandidate {
    pub fn exponent(&self) -> f64 {
        let lq = log10_rational(&BigRational::from_integer(self.q.clone()));
        if lq <= 0.0 || self.err.is_zero() {
            return f64::INFINITY;
        }
        -log10_rational(&self.err) / lq
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdaTerm {
    pub ell: usize,
    pub candidate: SdaCandidate,
    pub bound: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdaResult {
    pub mu: u32,
    pub witnessed: bool,
    pub terms: Vec<SdaTerm>,
    /// Best `−log err / log q` over brute-force `q ∈ [√Q_max, Q_max]`.
    pub best_exponent: f64,
    pub best_q: u64,
    /// Smallest `q^{1+1/μ}`-scaled error `q · dist` seen (μ = 1: `min_q q‖qα‖`).
    pub min_q_scaled_error: f64,
    /// Per seed, the best exponent over its multipliers.
    pub seed_exponents: Vec<(BigInt, f64)>,
    /// The last seed's exponent strictly exceeds all earlier ones.
    pub exponent_growth: bool,
    pub precision_digits: u32,
    pub q_max: u64,
}

impl SdaResult {
    pub fn to_json(&self) -> Value {
        json!({
            "mu": self.mu,
            "witnessed": self.witnessed,
            "witness": self.terms.iter().map(|t| json!({
                "ell": t.ell,
                "p": t.candidate.p.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "q": t.candidate.q.to_string(),
                "bound": format!("{:.6e}", rational_to_f64(&t.bound)),
                "log10_err": log10_rational(&t.candidate.err),
                "exponent": t.candidate.exponent(),
            })).collect::<Vec<_>>(),
            "best_exponent": self.best_exponent,
            "best_q": self.best_q,
            "min_q_scaled_error": self.min_q_scaled_error,
            "seed_exponents": self.seed_exponents.iter().map(|(s, e)| json!({"seed": s.to_string(), "exponent": e})).collect::<Vec<_>>(),
            "exponent_growth": self.exponent_growth,
            "precision_digits": self.precision_digits,
            "search_bounds": {"q_max": self.q_max},
        })
    }
}

/// Nearest-root numerators `p_j` (and neighbours) for one `q`.
pub fn best_candidate(powers: &[RealInterval], signs: &[i8], mu: u32, q: &BigInt) -> SdaCandidate {
    let qr = BigRational::from_integer(q.clone());
    let mut p = Vec::with_capacity(powers.len());
    let mut err = BigRational::zero();
    for (a, &sg) in powers.iter().zip(signs) {
        let target = (a.mid() * &qr).abs();
        let root = target.floor().to_integer().nth_root(mu);
        let mut best: Option<(BigRational, BigInt)> = None;
        for d in -1i64..=2 {
            let mag = &root + d;
            if mag.is_negative() || (sg != 0 && mag.is_zero()) {
                continue;
            }
            let pj = if sg < 0 { -mag.clone() } else { mag.clone() };
            let val = BigRational::new(num_traits::pow(pj.clone(), mu as usize), q.clone());
            let e = max_abs_error(a, &val);
            if best.as_ref().is_none_or(|(b, _)| &e < b) {
                best = Some((e, pj));
            }
        }
        let (e, pj) = best.expect("at least one numerator candidate");
        if e > err {
            err = e;
        }
        p.push(pj);
    }
    SdaCandidate { q: q.clone(), p, err }
}

/// Searches `max_j |α_j^μ − p_j^μ / q_ℓ| < C q_ℓ^{−ℓ}` with strictly increasing `q_ℓ`.
pub fn sda_search(alpha: &[RealInterval], opts: &SdaOptions) -> Result<SdaResult> {
    if opts.mu == 0 {
        return Err(Error::domain("mu must be at least 1"));
    }
    if opts.q_max == 0 && opts.seeds.is_empty() {
        return Err(Error::domain("empty search range"));
    }
    let powers: Vec<RealInterval> = alpha.iter().map(|a| a.pow(opts.mu)).collect();
    let signs: Vec<i8> = alpha
        .iter()
        .map(|a| if a.contains_zero() { 0 } else if a.lo.is_negative() { -1 } else { 1 })
        .collect();
    // small q only need digits well past C·Q_max^{−ℓ}; the coarse box still contains α^μ
    let coarse_digits = ((opts.q_max.max(2) as f64).log10() * (opts.ell_target as f64 + 1.0)).ceil() as u32 + 20;
    let coarse: Vec<RealInterval> = powers.iter().map(|a| a.outward(coarse_digits)).collect();
    let brute: Vec<SdaCandidate> =
        (1..=opts.q_max).into_par_iter().map(|q| best_candidate(&coarse, &signs, opts.mu, &BigInt::from(q))).collect();
    let mut seeded: Vec<(usize, SdaCandidate)> = opts
        .seeds
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, s)| {
            let powers = &powers;
            let signs = &signs;
            (1..=opts.seed_multipliers).map(move |m| (i, best_candidate(powers, signs, opts.mu, &(s * m))))
        })
        .collect();
    seeded.sort_by(|a, b| a.1.q.cmp(&b.1.q));

    let mut all: Vec<&SdaCandidate> = brute.iter().chain(seeded.iter().map(|(_, c)| c)).collect();
    all.sort_by(|a, b| a.q.cmp(&b.q));
    all.dedup_by(|a, b| a.q == b.q);

    let mut terms: Vec<SdaTerm> = Vec::new();
    for c in &all {
        if terms.len() >= opts.ell_target {
            break;
        }
        let ell = terms.len() + 1;
        let bound = &opts.c / BigRational::from_integer(num_traits::pow(c.q.clone(), ell));
        if c.err < bound {
            terms.push(SdaTerm { ell, candidate: (*c).clone(), bound });
        }
    }
    let lo_q = ((opts.q_max as f64).sqrt().ceil() as u64).max(2);
    let (best_exponent, best_q) = brute
        .iter()
        .filter(|c| c.q >= BigInt::from(lo_q))
        .map(|c| (c.exponent(), c.q.to_u64().unwrap_or(0)))
        .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let min_q_scaled_error = brute
        .iter()
        .map(|c| rational_to_f64(&c.err) * rational_to_f64(&BigRational::from_integer(c.q.clone())).powf(1.0 + 1.0 / opts.mu as f64))
        .fold(f64::INFINITY, f64::min);
    let mut seed_exponents: Vec<(BigInt, f64)> = Vec::new();
    for (i, s) in opts.seeds.iter().enumerate() {
        let e = seeded.iter().filter(|(j, _)| *j == i).map(|(_, c)| c.exponent()).fold(f64::NEG_INFINITY, f64::max);
        seed_exponents.push((s.clone(), e));
    }
    // the deepest seed beats every shallower one
    let exponent_growth = seed_exponents.len() >= 2
        && seed_exponents[..seed_exponents.len() - 1].iter().all(|s| s.1 < seed_exponents[seed_exponents.len() - 1].1);
    let precision_digits = alpha.iter().map(|a| a.certified_digits()).min().unwrap_or(u32::MAX);
    Ok(SdaResult {
        mu: opts.mu,
        witnessed: terms.len() >= opts.ell_target,
        terms,
        best_exponent,
        best_q,
        min_q_scaled_error,
        seed_exponents,
        exponent_growth,
        precision_digits,
        q_max: opts.q_max,
    })
}
