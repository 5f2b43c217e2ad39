//! Constant-coefficient systems on truncated Fourier boxes: the operator
//! `𝕃^p`, the compatibility set, the solver, small-divisor scans and the
//! witness construction for non-solvability.

mod scan;
mod sector;
mod solve;
mod witness;

pub use scan::{divisor_scan, DivisorRecord, DivisorScan, ScanMode, ScanOptions, ScanVerdict};
pub use sector::{
    compatibility_check, integral_phase, integral_sector, CompatibilityReport, IntegralSector, SectorFailure,
    WedgeFailure,
};
pub use solve::{solve_constant, solve_integral_sector, GrowthFit, Solution, SolveOptions};
pub use witness::{
    build_witness, demonstrate_blowup, zeta_rational, BlowupOptions, BlowupReport, BlowupTerm, Witness, WitnessSequence,
    WitnessTerm,
};

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::forms::TrigPForm;
use crate::scalar::{Real, Scalar};
use crate::symbols::{eval_symbol_slice, SystemSpec};

/// `𝕃^p u` for a constant-coefficient system, frequency by frequency.
pub fn apply_operator<S: Scalar>(spec: &SystemSpec, u: &TrigPForm<S>) -> Result<TrigPForm<S>> {
    if u.n() != spec.n || u.big_n() != spec.big_n {
        return Err(Error::domain("form does not live on the system's torus"));
    }
    u.wedge_slices(|f| eval_symbol_slice(spec, &f.eta, &f.xi))
}

/// Nearest integer, exact for rational fields.
pub(crate) fn round_real<R: Real>(x: &R) -> Result<i128> {
    match x.to_rational() {
        Some(r) => r
            .round()
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::Resource("integer part exceeds i128".into())),
        None => {
            let v = x.to_f64().round();
            if !v.is_finite() || v.abs() > 1.0e38 {
                return Err(Error::Resource("integer part exceeds i128".into()));
            }
            Ok(v as i128)
        }
    }
}

/// Least-squares line `y = a + b x`; `None` with fewer than two distinct `x`.
pub(crate) fn lsq_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}
