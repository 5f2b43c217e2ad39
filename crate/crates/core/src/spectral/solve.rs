use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{ConstPForm, Freq, TrigPForm};
use crate::scalar::{Scalar, Tolerances};
use crate::spectral::sector::{compatibility_check, integral_phase, CompatibilityReport};
use crate::spectral::{apply_operator, lsq_line};
use crate::symbols::{eval_symbol_slice, SystemSpec};
use crate::wedge::{wedge_divide_with, PivotRule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveOptions {
    pub pivot: PivotRule,
    pub tol: Tolerances,
}

/// Fit of `log ‖û‖ ≈ a + exponent · log |(η, ξ)|` over the solved support.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GrowthFit {
    pub exponent: f64,
    pub log_c: f64,
    pub samples: usize,
    /// Same fit for the amplification `‖û‖ / ‖f̂‖`.
    pub amplification_exponent: f64,
}

impl GrowthFit {
    pub fn of<S: Scalar>(u: &TrigPForm<S>, f: &TrigPForm<S>) -> Self {
        let mut pts = Vec::new();
        let mut amp = Vec::new();
        for (fr, v) in u.slices() {
            let r = fr.norm();
            let nu = v.sup_norm();
            if r < 1 || nu == 0.0 {
                continue;
            }
            let x = (r as f64).ln();
            pts.push((x, nu.ln()));
            if let Some(g) = f.get(fr) {
                let nf = g.sup_norm();
                if nf > 0.0 {
                    amp.push((x, (nu / nf).ln()));
                }
            }
        }
        let (log_c, exponent) = lsq_line(&pts).unwrap_or((0.0, 0.0));
        let amplification_exponent = lsq_line(&amp).map(|l| l.1).unwrap_or(0.0);
        GrowthFit { exponent, log_c, samples: pts.len(), amplification_exponent }
    }
}

#[derive(Clone, Debug)]
pub struct Solution<S> {
    pub u: TrigPForm<S>,
    /// `‖𝕃^p u − f‖_∞` over coefficients.
    pub residual_inf: f64,
    pub growth: GrowthFit,
    pub sector_frequencies: usize,
    pub compatibility: CompatibilityReport,
}

/// Solves `𝕃^p u = f` frequency by frequency.
///
/// Off the integral sector `û = (e_μ ⌟ f̂) / L̂_μ` with one global pivot per
/// slice; on it the phase-shifted form is integrated by `d_t`.
pub fn solve_constant<S: Scalar>(spec: &SystemSpec, f: &TrigPForm<S>, opts: &SolveOptions) -> Result<Solution<S>> {
    if f.degree() == 0 {
        return Err(Error::domain("right-hand side must have degree p + 1 ≥ 1"));
    }
    if f.n() != spec.n || f.big_n() != spec.big_n {
        return Err(Error::domain("right-hand side does not live on the system's torus"));
    }
    let compat = compatibility_check(f, spec, &opts.tol)?;
    if !compat.pass {
        return Err(Error::Compatibility { count: compat.failure_count(), first: compat.first_failure() });
    }
    let in_sector = |xi: &[i128]| compat.sector.phase(xi).is_some();
    let off: Vec<(&Freq, &ConstPForm<S>)> = f.slices().filter(|(fr, _)| !in_sector(&fr.xi)).collect();
    let solved: Vec<Result<(Freq, ConstPForm<S>)>> = off
        .par_iter()
        .map(|(fr, g)| {
            let l = eval_symbol_slice::<S>(spec, &fr.eta, &fr.xi)?;
            if l.is_zero() {
                return Err(Error::domain(format!(
                    "L̂ vanishes at eta={:?} xi={:?} although xi is not in the integral sector",
                    fr.eta, fr.xi
                )));
            }
            let d = wedge_divide_with(&l, g, opts.pivot, &opts.tol)?;
            Ok(((*fr).clone(), d.u))
        })
        .collect();
    let mut u = TrigPForm::zero(spec.n, spec.big_n, f.degree() - 1);
    for r in solved {
        let (fr, v) = r?;
        u.add_slice(fr, &v)?;
    }
    let mut sector_part = TrigPForm::zero(spec.n, spec.big_n, f.degree());
    let mut sector_frequencies = 0;
    for (fr, g) in f.slices() {
        if in_sector(&fr.xi) {
            sector_part.add_slice(fr.clone(), g)?;
            sector_frequencies += 1;
        }
    }
    if !sector_part.is_zero() {
        u = u.add(&solve_integral_sector(spec, &sector_part, &opts.tol)?)?;
    }
    let residual_inf = apply_operator(spec, &u)?.distance(f)?;
    let growth = GrowthFit::of(&u, f);
    Ok(Solution { u, residual_inf, growth, sector_frequencies, compatibility: compat })
}

/// Integral-sector branch: `h = f e^{iψ_ξ}`, `d_t v = h`, `u = v e^{-iψ_ξ}`.
pub fn solve_integral_sector<S: Scalar>(spec: &SystemSpec, f: &TrigPForm<S>, tol: &Tolerances) -> Result<TrigPForm<S>> {
    if f.degree() == 0 {
        return Err(Error::domain("right-hand side must have degree ≥ 1"));
    }
    let mut u = TrigPForm::zero(f.n(), f.big_n(), f.degree() - 1);
    for xi in f.xi_support() {
        let m = integral_phase::<S>(spec, &xi, tol)?
            .ok_or_else(|| Error::domain(format!("xi = {xi:?} is not in the integral sector")))?;
        let h = f.restrict_xi(&xi).shift_eta(&m);
        let cert = h.is_exact(tol);
        if !cert.exact {
            return Err(Error::Compatibility {
                count: cert.failures.len(),
                first: format!("exactness fails at xi = {xi:?}: {:?}", cert.failures[0]),
            });
        }
        let neg: Vec<i128> = m.iter().map(|v| -v).collect();
        let v = cert.primitive.expect("exact forms carry a primitive");
        u = u.add(&v.shift_eta(&neg))?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::MultiIndex;
    use crate::symbols::{Coef, ToroidalSymbol};
    use crate::{GaussianRational, C64};
    use num_traits::{One, Zero};

    type Q = GaussianRational;

    #[test]
    fn zero_rhs_gives_zero() {
        let spec = SystemSpec::linear_1d(vec![Coef::int(1), Coef::int(2)]).unwrap();
        let f = TrigPForm::<Q>::zero(2, 1, 1);
        let s = solve_constant(&spec, &f, &SolveOptions::default()).unwrap();
        assert!(s.u.is_zero());
        assert_eq!(s.residual_inf, 0.0);
    }

    #[test]
    fn manufactured_exponential() {
        // p₁(ξ) = ξ², p₂(ξ) = ξ + 1, u = e^{i(t₁ + x)}
        let spec = SystemSpec::new(vec![
            ToroidalSymbol::poly1(vec![Coef::int(0), Coef::int(0), Coef::int(1)]),
            ToroidalSymbol::poly1(vec![Coef::int(1), Coef::int(1)]),
        ])
        .unwrap();
        let mut u = TrigPForm::<C64>::zero(2, 1, 0);
        u.add_term(Freq::new(vec![1, 0], vec![1]), MultiIndex::EMPTY, C64::one()).unwrap();
        let f = apply_operator(&spec, &u).unwrap();
        let s = solve_constant(&spec, &f, &SolveOptions::default()).unwrap();
        assert!(s.residual_inf <= 1e-10);
    }

    #[test]
    fn sector_branch_one_dimensional() {
        // L = D_t + (1/2) D_x, f = e^{i(t − 2x)}: η + αξ = 0 and αξ = −1 is integral
        let spec = SystemSpec::linear_1d(vec![Coef::ratio(1, 2)]).unwrap();
        let mut f = TrigPForm::<Q>::zero(1, 1, 1);
        f.add_term(Freq::new(vec![1], vec![-2]), MultiIndex::single(1), Q::one()).unwrap();
        let r = compatibility_check(&f, &spec, &Tolerances::default()).unwrap();
        assert_eq!(r.sector.xi, vec![vec![-2]]);
        // the kernel frequency carries a period, so this f is not in the range
        assert!(!r.pass);
        assert!(matches!(solve_constant(&spec, &f, &SolveOptions::default()), Err(Error::Compatibility { .. })));

        // away from the kernel frequency the sector solve succeeds
        let mut g = TrigPForm::<Q>::zero(1, 1, 1);
        g.add_term(Freq::new(vec![3], vec![-2]), MultiIndex::single(1), Q::one()).unwrap();
        let s = solve_constant(&spec, &g, &SolveOptions::default()).unwrap();
        assert_eq!(s.sector_frequencies, 1);
        assert_eq!(s.residual_inf, 0.0);
        assert_eq!(apply_operator(&spec, &s.u).unwrap(), g);
    }

    #[test]
    fn sector_zero_phase_returns_primitive() {
        let spec = SystemSpec::new(vec![ToroidalSymbol::zero(1), ToroidalSymbol::zero(1)]).unwrap();
        let mut gform = TrigPForm::<Q>::zero(2, 1, 0);
        gform.add_term(Freq::new(vec![1, 2], vec![5]), MultiIndex::EMPTY, Q::from_i128(3)).unwrap();
        let f = gform.exterior_derivative();
        let u = solve_integral_sector(&spec, &f, &Tolerances::default()).unwrap();
        assert_eq!(u, gform);
    }

    #[test]
    fn incompatible_rhs_is_rejected() {
        let spec = SystemSpec::linear_1d(vec![Coef::ratio(1, 3), Coef::ratio(1, 5)]).unwrap();
        let mut f = TrigPForm::<Q>::zero(2, 1, 1);
        f.add_term(Freq::new(vec![1, 0], vec![1]), MultiIndex::single(2), Q::one()).unwrap();
        let e = solve_constant(&spec, &f, &SolveOptions::default()).unwrap_err();
        assert!(matches!(e, Error::Compatibility { .. }));
        let z = Q::zero();
        assert!(z.is_zero());
    }
}
