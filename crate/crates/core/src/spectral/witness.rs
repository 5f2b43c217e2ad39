//! Non-solvability witnesses: given frequencies with `0 < ‖L̂‖ < |(η,ξ)|^{−l}`,
//! build a smooth compatible `f` whose solutions must grow like `|(η,ξ)|^{δl}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{int_json, ConstPForm, Freq, MultiIndex, TrigPForm};
use crate::scalar::{rational_to_f64, Real, Scalar, Tolerances};
use crate::spectral::sector::{compatibility_check, CompatibilityReport};
use crate::spectral::{lsq_line, solve_constant, SolveOptions};
use crate::symbols::{eval_symbol_slice, SystemSpec};
use crate::wedge::{pivot_index, wedge_general, PivotRule};

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessTerm {
    pub freq: Freq,
    pub radius: u128,
    pub divisor: f64,
    pub divisor_sqr: Option<BigRational>,
}

impl WitnessTerm {
    fn to_json(&self) -> Value {
        json!({
            "eta": self.freq.eta.iter().map(|&v| int_json(v)).collect::<Vec<_>>(),
            "xi": self.freq.xi.iter().map(|&v| int_json(v)).collect::<Vec<_>>(),
            "radius": int_json(self.radius as i128),
            "divisor": self.divisor,
            "log10_divisor": self.log10_divisor(),
        })
    }

    fn log10_divisor(&self) -> f64 {
        match &self.divisor_sqr {
            Some(q) => log10_rational(q) / 2.0,
            None => self.divisor.log10(),
        }
    }
}

fn log10_rational(q: &BigRational) -> f64 {
    let v = rational_to_f64(q);
    if v > 0.0 && v.is_finite() {
        return v.log10();
    }
    let n = q.numer().to_string().trim_start_matches('-').len() as f64;
    let d = q.denom().to_string().len() as f64;
    n - d
}

/// Term `l` (1-based) has `0 < ‖L̂(η_l, ξ_l)‖ < |(η_l, ξ_l)|^{−l}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSequence {
    pub delta: f64,
    pub terms: Vec<WitnessTerm>,
}

fn term_for<S: Scalar>(spec: &SystemSpec, freq: &Freq) -> Result<WitnessTerm> {
    let l = eval_symbol_slice::<S>(spec, &freq.eta, &freq.xi)?;
    let sq = l.sup_norm_sqr();
    let divisor_sqr = sq.to_rational();
    let divisor = match &divisor_sqr {
        Some(r) => rational_to_f64(r).sqrt(),
        None => sq.to_f64().sqrt(),
    };
    Ok(WitnessTerm { freq: freq.clone(), radius: freq.norm(), divisor, divisor_sqr })
}

/// `0 < ‖L̂‖ < r^{−l}`, decided exactly when the divisor is exact.
fn divisor_ok(t: &WitnessTerm, l: usize) -> bool {
    if t.radius < 2 {
        return false;
    }
    match &t.divisor_sqr {
        Some(q) => {
            let r2l = num_traits::pow(BigInt::from(t.radius), 2 * l);
            !q.is_zero() && q * BigRational::from_integer(r2l) < BigRational::one()
        }
        None => t.divisor > 0.0 && t.divisor.ln() < -(l as f64) * (t.radius as f64).ln(),
    }
}

impl WitnessSequence {
    /// Uses the frequencies as given: the `k`-th becomes term `l = k`.
    pub fn from_frequencies<S: Scalar>(spec: &SystemSpec, freqs: &[Freq], delta: f64) -> Result<Self> {
        let terms = freqs.iter().map(|f| term_for::<S>(spec, f)).collect::<Result<Vec<_>>>()?;
        let ws = WitnessSequence { delta, terms };
        ws.validate()?;
        Ok(ws)
    }

    /// Greedy: term `l` is the first candidate (by radius) beyond term `l − 1`
    /// meeting the divisor inequality for `l`.
    pub fn search<S: Scalar>(spec: &SystemSpec, candidates: &[Freq], delta: f64, max_terms: usize) -> Result<Self> {
        let mut cands = candidates.iter().map(|f| term_for::<S>(spec, f)).collect::<Result<Vec<_>>>()?;
        cands.sort_by(|a, b| a.radius.cmp(&b.radius).then_with(|| a.freq.cmp(&b.freq)));
        let mut terms: Vec<WitnessTerm> = Vec::new();
        for c in cands {
            if terms.len() >= max_terms {
                break;
            }
            if terms.last().is_some_and(|t| c.radius <= t.radius) {
                continue;
            }
            if divisor_ok(&c, terms.len() + 1) {
                terms.push(c);
            }
        }
        if terms.is_empty() {
            return Err(Error::NoWitness("no candidate satisfies 0 < ‖L̂‖ < |(η,ξ)|^{-1}".into()));
        }
        let ws = WitnessSequence { delta, terms };
        ws.validate()?;
        Ok(ws)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && 2.0 * self.delta < 1.0) {
            return Err(Error::domain(format!("need 0 < 2δ < 1, got δ = {}", self.delta)));
        }
        if self.terms.is_empty() {
            return Err(Error::domain("empty witness sequence"));
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 && t.radius <= self.terms[k - 1].radius {
                return Err(Error::domain(format!("term {} does not increase |(η,ξ)|", k + 1)));
            }
            if !divisor_ok(t, k + 1) {
                return Err(Error::domain(format!(
                    "term {} at {:?} violates 0 < ‖L̂‖ < |(η,ξ)|^-{} (log10 ‖L̂‖ = {:.3}, radius {})",
                    k + 1,
                    t.freq,
                    k + 1,
                    t.log10_divisor(),
                    t.radius
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({"delta": self.delta, "terms": self.terms.iter().map(WitnessTerm::to_json).collect::<Vec<_>>()})
    }
}

/// `ζ ≈ r^{δl}` as an exact rational: `10^{⌊e⌋} · 10^{frac(e)}` with `e = δ l log₁₀ r`.
/// Integral exponents give exact powers of ten.
pub fn zeta_rational(radius: u128, delta: f64, l: usize) -> BigRational {
    let e = delta * l as f64 * (radius as f64).log10();
    let k = e.floor();
    let frac = e - k;
    let mantissa = if frac.abs() < 1e-12 {
        BigRational::one()
    } else {
        BigRational::from_float(10f64.powf(frac)).unwrap_or_else(BigRational::one)
    };
    let ten = BigInt::from(10);
    if k >= 0.0 {
        mantissa * BigRational::from_integer(num_traits::pow(ten, k as usize))
    } else {
        mantissa / BigRational::from_integer(num_traits::pow(ten, (-k) as usize))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessTermReport {
    pub l: usize,
    pub pivot: usize,
    pub zeta: f64,
    pub log10_zeta: f64,
    /// `log₁₀ max |f̂_J(η_l, ξ_l)|`.
    pub log10_coeff: f64,
    /// `−l/2 · log₁₀ r`.
    pub log10_decay_bound: f64,
    pub decay_ok: bool,
}

#[derive(Clone, Debug)]
pub struct Witness<S> {
    pub p: usize,
    pub f: TrigPForm<S>,
    /// `Σ_l ζ_l dt_K e^{i(η_l·t + ξ_l·x)}` with `L̂ ∧ û_l = f̂_l`.
    pub planted: TrigPForm<S>,
    pub terms: Vec<WitnessTermReport>,
    pub compatibility: CompatibilityReport,
}

/// Builds `f = Σ_l ζ_l L̂(η_l, ξ_l) ∧ dt_K` with `ζ_l ≈ |(η_l, ξ_l)|^{δl}`.
///
/// `K` lists `p` indices other than the pivot `μ = argmax_j |η_{j,l} + p_j(ξ_l)|`,
/// so for `p = 0` this is `f_j = i ζ_l (η_{j,l} + p_j(ξ_l))`.
pub fn build_witness<S: Scalar>(spec: &SystemSpec, ws: &WitnessSequence, p: usize, tol: &Tolerances) -> Result<Witness<S>> {
    ws.validate()?;
    if p + 1 > spec.n {
        return Err(Error::domain(format!("degree p + 1 = {} exceeds n = {}", p + 1, spec.n)));
    }
    let mut f = TrigPForm::zero(spec.n, spec.big_n, p + 1);
    let mut planted = TrigPForm::zero(spec.n, spec.big_n, p);
    let mut reports = Vec::new();
    for (k, t) in ws.terms.iter().enumerate() {
        let l = k + 1;
        let lhat = eval_symbol_slice::<S>(spec, &t.freq.eta, &t.freq.xi)?;
        let mu = pivot_index(&lhat, PivotRule::MaxModulus).expect("validated divisors are nonzero");
        let rest: Vec<usize> = (1..=spec.n).filter(|&j| j != mu).take(p).collect();
        let zq = zeta_rational(t.radius, ws.delta, l);
        let zeta = if S::EXACT { S::from_rationals(&zq, &BigRational::zero()) } else { S::from_real(S::Real::from_f64(rational_to_f64(&zq))) };
        let mut u_l = ConstPForm::zero(spec.n, p);
        u_l.add_term(MultiIndex::new(&rest, spec.n)?, zeta);
        let f_l = lhat.wedge(&u_l)?;
        let log10_r = (t.radius as f64).log10();
        let sq = f_l.sup_norm_sqr();
        let (log10_coeff, decay_ok) = match sq.to_rational() {
            Some(q) => {
                let rl = BigRational::from_integer(num_traits::pow(BigInt::from(t.radius), l));
                (log10_rational(&q) / 2.0, q * rl < BigRational::one())
            }
            None => {
                let c = sq.to_f64().sqrt().log10();
                (c, c < -(l as f64) / 2.0 * log10_r)
            }
        };
        if !decay_ok {
            return Err(Error::domain(format!("witness term {l} violates |f̂| < |(η,ξ)|^(-l/2)")));
        }
        reports.push(WitnessTermReport {
            l,
            pivot: mu,
            zeta: rational_to_f64(&zq),
            log10_zeta: ws.delta * l as f64 * log10_r,
            log10_coeff,
            log10_decay_bound: -(l as f64) / 2.0 * log10_r,
            decay_ok,
        });
        f.add_slice(t.freq.clone(), &f_l)?;
        planted.add_slice(t.freq.clone(), &u_l)?;
    }
    let compatibility = compatibility_check(&f, spec, tol)?;
    if !compatibility.pass {
        return Err(Error::Compatibility { count: compatibility.failure_count(), first: compatibility.first_failure() });
    }
    Ok(Witness { p, f, planted, terms: reports, compatibility })
}

impl<S: Scalar> Witness<S> {
    pub fn to_json(&self) -> Value {
        json!({"p": self.p, "terms": self.terms, "compatible": self.compatibility.pass})
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupOptions {
    /// Terms used to fit `‖û‖ ≈ C r^λ` before extrapolating.
    pub train: usize,
    /// Fixed exponent for the contradiction margin; fitted when absent.
    pub lambda_hat: Option<f64>,
    /// Polynomial degree quoted in the report.
    pub degree: f64,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions { train: 2, lambda_hat: None, degree: 10.0, seed: 0, tol: Tolerances::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupTerm {
    pub l: usize,
    pub log10_radius: f64,
    /// `log₁₀ ‖û(η_l, ξ_l)‖` of the computed solution.
    pub log10_forced: f64,
    /// `log‖û‖ / log r`; equals `δl` when `p = 0`.
    pub local_exponent: f64,
    /// Excess over the training fit, in decades (training terms give ≈ 0).
    pub excess_decades: f64,
    pub log10_margin: f64,
    /// `|Σ_j (−1)^{j+1} i(η_j + p_j) ζ^{(j)}|` on the pinned index (`p ≥ 1`).
    pub pinned_residual: Option<f64>,
    /// `(p + 1) ‖û‖ ≥ ζ_l`.
    pub lower_bound_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub p: usize,
    pub delta: f64,
    pub fit_c: f64,
    pub fit_lambda: f64,
    pub margin_lambda: f64,
    pub terms: Vec<BlowupTerm>,
    /// Some term after the training window exceeds the extrapolated fit.
    pub exceeds_fit: bool,
    pub first_exceeding_term: Option<usize>,
    pub margin_monotone: bool,
    /// Index `l` from which `δl` beats the quoted degree.
    pub terms_to_beat_degree: usize,
    pub degree: f64,
}

fn random_form<S: Scalar>(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> ConstPForm<S> {
    let mut w = ConstPForm::zero(n, degree);
    for k in MultiIndex::all(n, degree) {
        w.add_term(k, S::from_i128(rng.gen_range(-3..=3)));
    }
    w
}

/// Solves the truncated witness and measures how fast any solution must grow.
///
/// For `p = 0` the solution is unique and equals `ζ_l` at each term. For
/// `p ≥ 1` a solution is `U₀ + L̂ ∧ W` with random `W`; the difference
/// `ζ = û − û_l` satisfies `L̂ ∧ ζ = 0`, which pins `‖û‖ ≥ ζ_l / (p + 1)`.
pub fn demonstrate_blowup<S: Scalar>(
    spec: &SystemSpec,
    witness: &Witness<S>,
    ws: &WitnessSequence,
    opts: &BlowupOptions,
) -> Result<BlowupReport> {
    let p = witness.p;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sol = if p == 0 {
        Some(solve_constant(spec, &witness.f, &SolveOptions { tol: opts.tol, ..Default::default() })?.u)
    } else {
        None
    };
    let mut pts = Vec::new();
    let mut rows = Vec::new();
    for (k, t) in ws.terms.iter().enumerate() {
        let l = k + 1;
        let lhat = eval_symbol_slice::<S>(spec, &t.freq.eta, &t.freq.xi)?;
        let fl = witness.f.get(&t.freq).cloned().unwrap_or_else(|| ConstPForm::zero(spec.n, p + 1));
        let ul = witness.planted.get(&t.freq).cloned().unwrap_or_else(|| ConstPForm::zero(spec.n, p));
        let (u, pinned) = match &sol {
            Some(s) => (s.get(&t.freq).cloned().unwrap_or_else(|| ConstPForm::zero(spec.n, 0)), None),
            None => {
                let w = random_form::<S>(spec.n, p - 1, &mut rng);
                let u = wedge_general(&lhat, &fl, Some(&w), PivotRule::MaxModulus, &opts.tol)?;
                let zeta = u.sub(&ul)?;
                let (k_idx, _) = ul.terms().next().expect("planted term is nonzero");
                let mu = witness.terms[k].pivot;
                let pinned = lhat.wedge(&zeta)?.get(k_idx.with(mu)).modulus();
                (u, Some(pinned))
            }
        };
        let forced = u.sup_norm();
        let log10_r = (t.radius as f64).log10();
        let zeta_l = witness.terms[k].zeta;
        let log10_forced = forced.log10();
        pts.push((log10_r, log10_forced));
        rows.push((l, log10_r, log10_forced, zeta_l, pinned));
    }
    let train = opts.train.min(rows.len());
    let (a, b) = lsq_line(&pts[..train]).unwrap_or((pts[0].1, 0.0));
    let margin_lambda = opts.lambda_hat.unwrap_or(b);
    let margin_c = if opts.lambda_hat.is_some() { 0.0 } else { a };
    let mut terms = Vec::new();
    let mut first_exceeding = None;
    for (l, lr, lf, zeta_l, pinned) in rows {
        let excess = lf - (a + b * lr);
        if l > train && excess > 0.0 && first_exceeding.is_none() {
            first_exceeding = Some(l);
        }
        let log10_margin = ws.delta * l as f64 * lr - ((p + 1) as f64).log10() - margin_c - margin_lambda * lr;
        let slack = if S::EXACT { 0.0 } else { 1e-9 };
        terms.push(BlowupTerm {
            l,
            log10_radius: lr,
            log10_forced: lf,
            local_exponent: if lr > 0.0 { lf / lr } else { f64::NAN },
            excess_decades: excess,
            log10_margin,
            pinned_residual: pinned,
            lower_bound_ok: lf + ((p + 1) as f64).log10() >= zeta_l.log10() - slack,
        });
    }
    // the random kernel part moves training terms by ~1e-9 decades
    let margin_monotone = terms.windows(2).all(|w| w[1].log10_margin >= w[0].log10_margin - 1e-6)
        && terms.last().map(|t| t.log10_margin).unwrap_or(0.0) > terms[0].log10_margin;
    Ok(BlowupReport {
        p,
        delta: ws.delta,
        fit_c: 10f64.powf(a),
        fit_lambda: b,
        margin_lambda,
        exceeds_fit: first_exceeding.is_some(),
        first_exceeding_term: first_exceeding,
        margin_monotone,
        terms_to_beat_degree: (opts.degree / ws.delta).floor() as usize + 1,
        degree: opts.degree,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{Coef, SymbolKind, ToroidalSymbol};
    use crate::GaussianRational;

    type Q = GaussianRational;

    #[test]
    fn zeta_is_exact_power_of_ten_on_integral_exponents() {
        assert_eq!(zeta_rational(1_000_000, 0.25, 2), BigRational::from_integer(1000.into()));
        let z = rational_to_f64(&zeta_rational(100, 0.25, 1));
        assert!((z - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_bad_sequences_are_rejected() {
        let spec = SystemSpec::linear_1d(vec![Coef::ratio(1, 3)]).unwrap();
        assert!(WitnessSequence::from_frequencies::<Q>(&spec, &[], 0.25).is_err());
        // rational coefficient: ‖L̂‖ ≥ 1/3 never beats r^{-1} for r ≥ 3
        let f = Freq::new(vec![-3], vec![10]);
        assert!(WitnessSequence::from_frequencies::<Q>(&spec, std::slice::from_ref(&f), 0.25).is_err());
        assert!(WitnessSequence::search::<Q>(&spec, &[f], 0.25, 3).is_err());
    }

    fn planted_toy() -> (SystemSpec, Vec<Freq>) {
        // p = 1, n = 2, N = 1: ξ_l = 2^{l+2}, η_l = (ξ_l, ξ_l), divisors r^{-(l+1)}
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        let mut freqs = Vec::new();
        for l in 1..=6u32 {
            let x = 1i128 << (l + 2);
            let small = BigRational::new(1.into(), num_traits::pow(BigInt::from(x), (l + 1) as usize));
            let base = BigRational::from_integer((-x).into());
            t1.push((vec![x], Coef::real(base.clone() + small.clone())));
            t2.push((vec![x], Coef::real(base + small / BigRational::from_integer(2.into()))));
            freqs.push(Freq::new(vec![x, x], vec![x]));
        }
        let spec = SystemSpec::new(vec![
            ToroidalSymbol::new(1, 1.0, SymbolKind::Tabulated(t1)),
            ToroidalSymbol::new(1, 1.0, SymbolKind::Tabulated(t2)),
        ])
        .unwrap();
        (spec, freqs)
    }

    #[test]
    fn planted_toy_margin_grows() {
        let (spec, freqs) = planted_toy();
        let ws = WitnessSequence::from_frequencies::<Q>(&spec, &freqs, 0.25).unwrap();
        let w = build_witness::<Q>(&spec, &ws, 1, &Tolerances::default()).unwrap();
        assert!(w.compatibility.pass);
        let rep = demonstrate_blowup(&spec, &w, &ws, &BlowupOptions::default()).unwrap();
        for t in &rep.terms {
            assert_eq!(t.pinned_residual, Some(0.0));
            assert!(t.lower_bound_ok);
        }
        assert!(rep.margin_monotone, "{:?}", rep.terms);
    }

    #[test]
    fn p_too_large_is_rejected() {
        let (spec, freqs) = planted_toy();
        let ws = WitnessSequence::from_frequencies::<Q>(&spec, &freqs, 0.25).unwrap();
        assert!(build_witness::<Q>(&spec, &ws, 2, &Tolerances::default()).is_err());
    }
}
