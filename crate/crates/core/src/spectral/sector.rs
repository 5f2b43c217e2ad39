use serde::Serialize;

use crate::error::Result;
use crate::forms::{ExactnessFailure, TrigPForm};
use crate::scalar::{Scalar, Tolerances};
use crate::symbols::{eval_symbol_slice, integral_part, SystemSpec};
use crate::wedge::{compat_residual, wedge_compat};

/// Integer components of `c_{ξ0} = Σ p_j(ξ) dt_j` when they are all integers.
///
/// A component with integer real part and nonzero imaginary part does not count.
pub fn integral_phase<S: Scalar>(spec: &SystemSpec, xi: &[i128], tol: &Tolerances) -> Result<Option<Vec<i128>>> {
    let p = spec.p_values::<S>(xi)?;
    Ok(integral_part(&p, tol.integral))
}

/// The part of `𝒵` met by a list of `ξ`, with the integer phase `m` of `ψ_ξ(t) = m·t`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntegralSector {
    pub xi: Vec<Vec<i128>>,
    pub phases: Vec<Vec<i128>>,
}

impl IntegralSector {
    pub fn phase(&self, xi: &[i128]) -> Option<&[i128]> {
        self.xi.iter().position(|x| x == xi).map(|i| self.phases[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

pub fn integral_sector<S: Scalar>(spec: &SystemSpec, xis: &[Vec<i128>], tol: &Tolerances) -> Result<IntegralSector> {
    let mut out = IntegralSector::default();
    for xi in xis {
        if let Some(m) = integral_phase::<S>(spec, xi, tol)? {
            out.xi.push(xi.clone());
            out.phases.push(m);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WedgeFailure {
    pub eta: Vec<i128>,
    pub xi: Vec<i128>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorFailure {
    pub xi: Vec<i128>,
    pub phase: Vec<i128>,
    pub failure: ExactnessFailure,
}

/// Outcome of testing `f ∈ 𝔼^p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub pass: bool,
    pub frequencies_checked: usize,
    pub max_wedge_residual: f64,
    pub wedge_failures: Vec<WedgeFailure>,
    pub sector: IntegralSector,
    pub exactness_failures: Vec<SectorFailure>,
}

impl CompatibilityReport {
    pub fn failure_count(&self) -> usize {
        self.wedge_failures.len() + self.exactness_failures.len()
    }

    pub fn first_failure(&self) -> String {
        if let Some(w) = self.wedge_failures.first() {
            format!("L∧f ≠ 0 at eta={:?} xi={:?} (residual {:e})", w.eta, w.xi, w.residual)
        } else if let Some(s) = self.exactness_failures.first() {
            format!("not exact on the integral sector at xi={:?}: {:?}", s.xi, s.failure)
        } else {
            "none".into()
        }
    }
}

/// Checks `L̂ ∧ f̂ = 0` on the support of `f` and, for `ξ ∈ 𝒵`, exactness of
/// `f̂(t, ξ) e^{iψ_ξ(t)}` after the integer shift `η → η + c_{ξ0}`.
pub fn compatibility_check<S: Scalar>(
    f: &TrigPForm<S>,
    spec: &SystemSpec,
    tol: &Tolerances,
) -> Result<CompatibilityReport> {
    let mut wedge_failures = Vec::new();
    let mut max_res = 0.0f64;
    for (fr, g) in f.slices() {
        let l = eval_symbol_slice::<S>(spec, &fr.eta, &fr.xi)?;
        if !wedge_compat(&l, g, tol)? {
            let residual = compat_residual(&l, g)?;
            max_res = max_res.max(residual);
            wedge_failures.push(WedgeFailure { eta: fr.eta.clone(), xi: fr.xi.clone(), residual });
        } else if !S::EXACT {
            max_res = max_res.max(compat_residual(&l, g)?);
        }
    }
    let sector = integral_sector::<S>(spec, &f.xi_support(), tol)?;
    let mut exactness_failures = Vec::new();
    for (xi, m) in sector.xi.iter().zip(&sector.phases) {
        let h = f.restrict_xi(xi).shift_eta(m);
        let cert = h.is_exact(tol);
        for failure in cert.failures {
            exactness_failures.push(SectorFailure { xi: xi.clone(), phase: m.clone(), failure });
        }
    }
    Ok(CompatibilityReport {
        pass: wedge_failures.is_empty() && exactness_failures.is_empty(),
        frequencies_checked: f.num_frequencies(),
        max_wedge_residual: max_res,
        wedge_failures,
        sector,
        exactness_failures,
    })
}
