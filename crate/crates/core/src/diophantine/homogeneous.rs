use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diophantine::cfrac::{detect_rational, RationalDetection};
use crate::diophantine::interval::RealInterval;
use crate::diophantine::liouville::{liouville_interval, liouville_truncations};
use crate::diophantine::sda::{rational_lowerbound, sda_search, SdaOptions, SdaResult};
use crate::diophantine::{DiophantineVerdict, VerdictTag};
use crate::error::{Error, Result};

/// `Q_k^μ` for the Liouville denominators `Q_k = 10^{k!}`, `k = 1..=kmax`.
pub fn liouville_seeds(mu: u32, kmax: u32) -> Result<Vec<BigInt>> {
    Ok(liouville_truncations(kmax)?.into_iter().map(|t| num_traits::pow(t.q, mu as usize)).collect())
}

/// `α = (ℒ (3/2)^{1/μ}, ℒ (3·2^{μ−1})^{1/μ})`, so `α^μ = ℒ^μ (3/2, 3·2^{μ−1})`.
///
/// For `μ = 2` and a truncation `P/Q` of `ℒ`, `p = (3P, 6P)` and `q = 6Q²` give
/// `p² / q = (P/Q)² (3/2, 6)`.
pub fn sda_example_alpha(mu: u32, digits: u32) -> Result<Vec<RealInterval>> {
    if mu == 0 {
        return Err(Error::domain("mu must be positive"));
    }
    let l = liouville_interval(digits)?;
    let root_digits = l.digits + 10;
    let a = RealInterval::nth_root(&BigRational::new(3.into(), 2.into()), mu, root_digits)?;
    let b = RealInterval::nth_root(&BigRational::from_integer(BigInt::from(3) * num_traits::pow(BigInt::from(2), (mu - 1) as usize)), mu, root_digits)?;
    Ok(vec![a.mul(&l).with_digits(l.digits), b.mul(&l).with_digits(l.digits)])
}

/// Options shared by [`characterize_homogeneous`] and [`classify_constant`].
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousOptions {
    pub q_max: u64,
    pub ell_target: usize,
    pub seeds: Vec<BigInt>,
    pub seed_multipliers: u64,
    /// Direct scan over `1 ≤ ξ ≤ scan_x`.
    pub scan_x: u64,
    /// A record counts as sub-polynomial when `Q < R^{−subpoly_exponent}`.
    pub subpoly_exponent: f64,
}

impl Default for HomogeneousOptions {
    fn default() -> Self {
        HomogeneousOptions { q_max: 10_000, ell_target: 3, seeds: vec![], seed_multipliers: 64, scan_x: 10_000, subpoly_exponent: 3.0 }
    }
}

/// One `ξ` of the direct criterion scan.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectRecord {
    pub xi: u64,
    pub eta: Vec<i64>,
    /// `max_j |η_j / ξ^κ + c_j|`.
    pub q: f64,
    /// `|η| + ξ`.
    pub r: f64,
    /// `−ln Q / ln R`.
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectScan {
    pub x_max: u64,
    pub kappa: (u32, u32),
    pub worst: Option<DirectRecord>,
    pub subpolynomial: Vec<DirectRecord>,
    /// Hits with `Q` at rounding level: integral sector frequencies, excluded.
    pub sector_hits: usize,
    pub threshold_exponent: f64,
}

impl DirectScan {
    pub fn finds_subpolynomial(&self) -> bool {
        !self.subpolynomial.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let rec = |r: &DirectRecord| json!({"xi": r.xi, "eta": r.eta, "Q": r.q, "R": r.r, "exponent": r.exponent});
        json!({
            "x_max": self.x_max,
            "kappa": format!("{}/{}", self.kappa.0, self.kappa.1),
            "worst": self.worst.as_ref().map(rec),
            "subpolynomial": self.subpolynomial.iter().take(10).map(rec).collect::<Vec<_>>(),
            "subpolynomial_count": self.subpolynomial.len(),
            "sector_hits": self.sector_hits,
            "threshold_exponent": self.threshold_exponent,
        })
    }
}

/// Scans `max_j |η_j/ξ^κ + c_j|` against `(|η| + ξ)^{−λ}` with the per-`j`
/// nearest `η_j` (and its neighbours) at each `ξ`.
pub fn direct_scan(c: &[f64], rho: u32, mu: u32, x_max: u64, subpoly_exponent: f64) -> DirectScan {
    let kappa = rho as f64 / mu as f64;
    let recs: Vec<Option<DirectRecord>> = (1..=x_max)
        .into_par_iter()
        .map(|xi| {
            let s = (xi as f64).powf(kappa);
            let mut eta = Vec::with_capacity(c.len());
            let mut q = 0.0f64;
            for &cj in c {
                let centre = (-cj * s).round();
                let (e, d) = [-1.0, 0.0, 1.0]
                    .iter()
                    .map(|d| {
                        let e = centre + d;
                        (e, (e / s + cj).abs())
                    })
                    .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                eta.push(e as i64);
                q = q.max(d);
            }
            let norm = eta.iter().map(|&e| (e as f64) * (e as f64)).sum::<f64>().sqrt();
            let r = norm + xi as f64;
            // rounding floor of the f64 evaluation
            if q <= 1e-13 * (1.0 + norm / s) {
                return None;
            }
            Some(DirectRecord { xi, eta, q, r, exponent: -q.ln() / r.ln() })
        })
        .collect();
    let sector_hits = recs.iter().filter(|r| r.is_none()).count();
    let recs: Vec<DirectRecord> = recs.into_iter().flatten().collect();
    let worst = recs
        .iter()
        .filter(|r| r.r > 1.0)
        .fold(None::<&DirectRecord>, |a, b| match a {
            Some(a) if a.exponent >= b.exponent => Some(a),
            _ => Some(b),
        })
        .cloned();
    // R = 1 only at ξ = 1, η = 0, where every threshold is 1
    let subpolynomial = recs.iter().filter(|r| r.r >= 2.0 && r.q < r.r.powf(-subpoly_exponent)).cloned().collect();
    DirectScan { x_max, kappa: (rho, mu), worst, subpolynomial, sector_hits, threshold_exponent: subpoly_exponent }
}

/// Outcome of [`characterize_homogeneous`].
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousReport {
    pub verdict: DiophantineVerdict,
    /// `Some(true)` solvable, `Some(false)` not solvable, `None` undecided at these bounds.
    pub solvable: Option<bool>,
    pub detection: Option<RationalDetection>,
    pub sda: Option<SdaResult>,
    pub scan: Option<DirectScan>,
    /// Witness search and direct scan point the same way.
    pub agreement: bool,
    pub note: Option<String>,
}

impl HomogeneousReport {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.to_json(),
            "solvable": self.solvable,
            "detection": self.detection.as_ref().map(RationalDetection::to_json),
            "sda": self.sda.as_ref().map(SdaResult::to_json),
            "direct_scan": self.scan.as_ref().map(DirectScan::to_json),
            "agreement": self.agreement,
            "note": self.note,
        })
    }
}

/// Solvability of `D_{t_j} + c_j |D_x|^κ` for `κ = ρ/μ` in lowest terms.
///
/// Nonzero imaginary parts settle it at once. Otherwise: rational real parts
/// give solvability, an `(SDA)_μ` witness refutes it, and neither leaves the
/// question open at the declared bounds. The direct criterion scan runs in
/// the real case and the report states whether both paths agree.
pub fn characterize_homogeneous(
    c_re: &[RealInterval],
    c_im: &[RealInterval],
    rho: u32,
    mu: u32,
    opts: &HomogeneousOptions,
) -> Result<HomogeneousReport> {
    if mu == 0 || rho == 0 {
        return Err(Error::domain("kappa = rho/mu needs positive rho and mu"));
    }
    if rho.gcd(&mu) != 1 {
        return Err(Error::domain(format!("kappa = {rho}/{mu} is not in lowest terms")));
    }
    if c_re.is_empty() || c_re.len() != c_im.len() {
        return Err(Error::domain("c needs matching real and imaginary parts"));
    }
    let digits = c_re.iter().chain(c_im).map(RealInterval::certified_digits).min().unwrap_or(u32::MAX);
    if c_im.iter().any(|b| !b.contains_zero()) {
        let verdict = DiophantineVerdict {
            tag: VerdictTag::BetaNonzero,
            q0: None,
            mu: Some(mu),
            witness: vec![],
            precision_digits: digits,
            search_bounds: json!({}),
        };
        return Ok(HomogeneousReport { verdict, solvable: Some(true), detection: None, sda: None, scan: None, agreement: true, note: None });
    }
    let cf: Vec<f64> = c_re.iter().map(RealInterval::to_f64).collect();
    let scan = direct_scan(&cf, rho, mu, opts.scan_x, opts.subpoly_exponent);
    let bounds = json!({"q_max": opts.q_max, "ell_target": opts.ell_target, "seeds": opts.seeds.len(), "seed_multipliers": opts.seed_multipliers, "scan_x": opts.scan_x});
    let detection = detect_rational(c_re)?;
    if let RationalDetection::Rational { q0, .. } = &detection {
        let verdict = DiophantineVerdict {
            tag: VerdictTag::Rational,
            q0: Some(q0.clone()),
            mu: Some(mu),
            witness: vec![],
            precision_digits: digits,
            search_bounds: bounds,
        };
        let agreement = !scan.finds_subpolynomial();
        return Ok(HomogeneousReport {
            verdict,
            solvable: Some(true),
            detection: Some(detection),
            sda: None,
            note: (!agreement).then(|| "direct scan found sub-polynomial divisors for rational c".into()),
            scan: Some(scan),
            agreement,
        });
    }
    let sda = sda_search(
        c_re,
        &SdaOptions {
            mu,
            q_max: opts.q_max,
            ell_target: opts.ell_target,
            seeds: opts.seeds.clone(),
            seed_multipliers: opts.seed_multipliers,
            ..Default::default()
        },
    )?;
    let tag = if sda.witnessed { VerdictTag::SdaWitnessed } else { VerdictTag::NoWitnessFound };
    let verdict = DiophantineVerdict::from_sda(tag, &sda, digits, bounds);
    let agreement = sda.witnessed == scan.finds_subpolynomial();
    let note = (!agreement).then(|| {
        if sda.witnessed {
            let qmax = sda.terms.iter().map(|t| t.candidate.q.clone()).max().unwrap_or_default();
            format!(
                "witness search certifies {} (SDA) terms up to q = {qmax}; the direct scan to xi = {} has no divisor below R^-{}",
                sda.terms.len(),
                opts.scan_x,
                opts.subpoly_exponent
            )
        } else {
            "direct scan found sub-polynomial divisors that the witness search did not certify".to_string()
        }
    });
    Ok(HomogeneousReport {
        solvable: if sda.witnessed { Some(false) } else { None },
        verdict,
        detection: Some(detection),
        sda: Some(sda),
        scan: Some(scan),
        agreement,
        note,
    })
}

/// Real constant coefficient `a₀` of `d_t + a₀∧∂_x`: rational (with `C₀`),
/// Liouville-witnessed, or no witness at these bounds.
pub fn classify_constant(alpha: &[RealInterval], opts: &HomogeneousOptions) -> Result<(DiophantineVerdict, Value)> {
    let digits = alpha.iter().map(RealInterval::certified_digits).min().unwrap_or(u32::MAX);
    let bounds = json!({"q_max": opts.q_max, "ell_target": opts.ell_target, "seeds": opts.seeds.len(), "seed_multipliers": opts.seed_multipliers});
    match detect_rational(alpha)? {
        RationalDetection::Rational { q0, components, precision_limited } => {
            let lb = rational_lowerbound(&components)?;
            let v = DiophantineVerdict { tag: VerdictTag::Rational, q0: Some(q0), mu: None, witness: vec![], precision_digits: digits, search_bounds: bounds };
            Ok((v, json!({"lower_bound": lb.to_json(), "precision_limited": precision_limited})))
        }
        det => {
            let sda = sda_search(
                alpha,
                &SdaOptions {
                    mu: 1,
                    q_max: opts.q_max,
                    ell_target: opts.ell_target,
                    seeds: opts.seeds.clone(),
                    seed_multipliers: opts.seed_multipliers,
                    ..Default::default()
                },
            )?;
            let tag = if sda.witnessed { VerdictTag::LiouvilleWitnessed } else { VerdictTag::NoWitnessFound };
            let v = DiophantineVerdict::from_sda(tag, &sda, digits, bounds);
            Ok((v, json!({"detection": det.to_json(), "sda": sda.to_json()})))
        }
    }
}
