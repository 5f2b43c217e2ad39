use std::f64::consts::TAU;

use serde::Serialize;
use serde_json::{json, Value};

use crate::forms::int_json;
use crate::normal_form::profile::NormalForm;
use crate::normal_form::trig_poly::TrigPoly;
use crate::scalar::Scalar;
use crate::spectral::lsq_line;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionDVerdict {
    Pass,
    SuperPolynomial,
}

/// Which quantity was bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionDForm {
    /// `Π_j sup_ζ exp(∫₀^ζ Im(p_j(ξ) c_j(s)) ds)` for decoupled profiles.
    Integral,
    /// `sup_t exp(Im 𝒞_ξ(t))` with zero-mean `𝒞_ξ`.
    Normalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionDEntry {
    pub xi: Vec<i128>,
    /// `ln S(ξ)`; `S` itself overflows long before the growth test needs it.
    pub log_sup: f64,
    /// `ln sup_t exp(Im 𝒞_ξ)` for the zero-mean `𝒞_ξ`.
    pub log_sup_normalized: f64,
    /// Per-`j` integral form, decoupled profiles only.
    pub log_sup_per_j: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionDReport {
    pub form: ConditionDForm,
    pub per_xi: Vec<ConditionDEntry>,
    /// `S(ξ) ≤ C |ξ|^κ` on the box, `ξ ≠ 0`.
    pub c: f64,
    pub kappa: f64,
    /// Log-log slopes of the upper envelope over the inner and outer halves of the box.
    pub slope_inner: f64,
    pub slope_outer: f64,
    pub verdict: ConditionDVerdict,
    pub grid: usize,
}

impl ConditionDReport {
    pub fn max_log_sup(&self) -> f64 {
        self.per_xi.iter().map(|e| e.log_sup).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "form": self.form,
            "per_xi": self.per_xi.iter().map(|e| json!({
                "xi": e.xi.iter().map(|&v| int_json(v)).collect::<Vec<_>>(),
                "sup_exp_im": e.log_sup.exp(),
                "log_sup_exp_im": e.log_sup,
                "log_sup_exp_im_normalized": e.log_sup_normalized,
                "log_per_j": e.log_sup_per_j,
            })).collect::<Vec<_>>(),
            "fit": {"C": self.c, "kappa": self.kappa, "slope_inner": self.slope_inner, "slope_outer": self.slope_outer},
            "verdict": self.verdict,
            "grid": self.grid,
        })
    }
}

/// Options for [`check_condition_d`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionDOptions {
    /// Grid resolution is at least `grid_factor × 2 × bandwidth` points per axis.
    pub grid_factor: usize,
    pub min_grid: usize,
    /// Fitted `κ` above this counts as super-polynomial at box scale.
    pub kappa_max: f64,
}

impl Default for ConditionDOptions {
    fn default() -> Self {
        ConditionDOptions { grid_factor: 4, min_grid: 1 << 10, kappa_max: 20.0 }
    }
}

fn grid_points(n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |i| {
                    let mut q = p.clone();
                    q.push(TAU * i as f64 / m as f64);
                    q
                })
            })
            .collect();
    }
    out
}

fn sup_im(p: &TrigPoly<C64>, pts: &[Vec<f64>]) -> f64 {
    pts.iter().map(|t| p.eval_c64(t).im).fold(f64::NEG_INFINITY, f64::max)
}

/// `sup_{ζ ∈ [0, 2π]} Im(p ∫₀^ζ c)` on a grid including both ends.
fn integral_sup(pj: C64, c: &TrigPoly<C64>, m: usize) -> f64 {
    let c0 = c.mean();
    let prim = c.primitive(1).expect("one variable");
    let base = prim.eval_c64(&[0.0]);
    (0..=m)
        .map(|i| {
            let z = TAU * i as f64 / m as f64;
            (pj * (c0 * z + prim.eval_c64(&[z]) - base)).im
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Evaluates `S(ξ)` on the box, fits `(C, κ)` and flags super-polynomial growth.
///
/// Decoupled profiles use the integral form, whose running integral starts at
/// `ζ = 0` so `S ≥ 1`; other profiles use `sup exp(Im 𝒞_ξ)` of the zero-mean `𝒞_ξ`.
pub fn check_condition_d<S: Scalar>(nf: &NormalForm<S>, opts: &ConditionDOptions) -> ConditionDReport {
    let bw = nf.slices.iter().map(|s| s.cal.bandwidth()).max().unwrap_or(0).max(1) as usize;
    let per_axis = (opts.grid_factor * 2 * bw).max(8);
    let m1 = per_axis.max(opts.min_grid);
    let m_general = if nf.n == 1 { m1 } else { per_axis.max(16) };
    let dec: Option<Vec<TrigPoly<C64>>> = nf.decoupled.as_ref().map(|cs| cs.iter().map(TrigPoly::to_c64).collect());
    let form = if dec.is_some() { ConditionDForm::Integral } else { ConditionDForm::Normalized };
    let pts = if dec.is_none() { grid_points(nf.n, m_general) } else { vec![] };
    let per_xi: Vec<ConditionDEntry> = nf
        .slices
        .iter()
        .map(|s| {
            let cal = s.cal.to_c64();
            match &dec {
                Some(cs) => {
                    let per_j: Vec<f64> = cs.iter().zip(&s.p).map(|(c, p)| integral_sup(p.to_c64(), c, m1)).collect();
                    // separable: the sup of the sum is the sum of the sups
                    let normalized: f64 = cs
                        .iter()
                        .zip(&s.p)
                        .map(|(c, p)| {
                            let g = c.primitive(1).expect("one variable").scale(&p.to_c64());
                            sup_im(&g, &grid_points(1, m1))
                        })
                        .sum();
                    ConditionDEntry { xi: s.xi.clone(), log_sup: per_j.iter().sum(), log_sup_normalized: normalized, log_sup_per_j: Some(per_j) }
                }
                None => {
                    let v = sup_im(&cal, &pts);
                    ConditionDEntry { xi: s.xi.clone(), log_sup: v, log_sup_normalized: v, log_sup_per_j: None }
                }
            }
        })
        .collect();
    let (c, kappa, slope_inner, slope_outer) = fit(&per_xi);
    let superpoly = kappa > opts.kappa_max || (slope_outer > 1.0 && slope_outer > 1.5 * slope_inner + 0.5);
    ConditionDReport {
        form,
        per_xi,
        c,
        kappa,
        slope_inner,
        slope_outer,
        verdict: if superpoly { ConditionDVerdict::SuperPolynomial } else { ConditionDVerdict::Pass },
        grid: if dec.is_some() { m1 } else { m_general },
    }
}

fn radius(xi: &[i128]) -> f64 {
    xi.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt()
}

/// Upper envelope by radius, LSQ slope for `κ ≥ 0`, then the least `C` with no violation.
fn fit(entries: &[ConditionDEntry]) -> (f64, f64, f64, f64) {
    let mut env: Vec<(f64, f64)> = Vec::new();
    for e in entries {
        let r = radius(&e.xi);
        if r < 1.0 {
            continue;
        }
        match env.iter_mut().find(|(x, _)| (*x - r).abs() < 1e-9) {
            Some(p) => p.1 = p.1.max(e.log_sup),
            None => env.push((r, e.log_sup)),
        }
    }
    env.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if env.is_empty() {
        return (1.0, 0.0, 0.0, 0.0);
    }
    let pts: Vec<(f64, f64)> = env.iter().map(|(r, s)| (r.ln(), *s)).collect();
    let kappa = lsq_line(&pts).map(|l| l.1).unwrap_or(0.0).max(0.0);
    let log_c = pts.iter().map(|(lr, s)| s - kappa * lr).fold(f64::NEG_INFINITY, f64::max);
    let rmax = env.last().unwrap().0;
    let inner: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0.exp() <= rmax / 2.0 + 1e-9).collect();
    let outer: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0.exp() >= rmax / 2.0 - 1e-9).collect();
    let slope = |v: &[(f64, f64)]| lsq_line(v).map(|l| l.1).unwrap_or(0.0);
    (log_c.exp(), kappa, slope(&inner), slope(&outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::FrequencyBox;
    use crate::normal_form::examples::*;
    use crate::normal_form::profile::decompose;
    use crate::scalar::Tolerance;
    use crate::symbols::{Coef, SystemSpec, ToroidalSymbol};

    fn xis(x: u64) -> Vec<Vec<i128>> {
        FrequencyBox::new(0, x).xis(1)
    }

    #[test]
    fn real_closed_form_gives_one() {
        let (spec, prof) = real_closed_system();
        let nf = decompose(&prof, &spec, &xis(8), &Tolerance::default()).unwrap();
        let r = check_condition_d(&nf, &ConditionDOptions::default());
        assert_eq!(r.form, ConditionDForm::Normalized);
        assert!(r.per_xi.iter().all(|e| e.log_sup.abs() < 1e-12));
        assert_eq!(r.kappa, 0.0);
        assert_eq!(r.verdict, ConditionDVerdict::Pass);
    }

    #[test]
    fn sign_definite_stays_below_one() {
        let (spec, prof) = sign_definite_system();
        let nf = decompose(&prof, &spec, &xis(16), &Tolerance::default()).unwrap();
        let r = check_condition_d(&nf, &ConditionDOptions::default());
        assert!(r.max_log_sup() <= 1e-12, "{}", r.max_log_sup());
        assert_eq!(r.verdict, ConditionDVerdict::Pass);
    }

    #[test]
    fn growing_imaginary_flagged() {
        let (spec, prof) = growing_imaginary_system();
        let nf = decompose(&prof, &spec, &xis(16), &Tolerance::default()).unwrap();
        let r = check_condition_d(&nf, &ConditionDOptions::default());
        assert_eq!(r.verdict, ConditionDVerdict::SuperPolynomial);
    }

    #[test]
    fn logarithmic_symbol_passes() {
        let spec = SystemSpec::new(vec![ToroidalSymbol::logarithmic(1, Coef::exact(crate::scalar::rational_from_i128(1), crate::scalar::rational_from_i128(1)))]).unwrap();
        let (_, prof) = growing_imaginary_system();
        let nf = decompose(&prof.map(|v| v.to_c64()), &spec, &xis(64), &Tolerance::default()).unwrap();
        let r = check_condition_d(&nf, &ConditionDOptions::default());
        assert_eq!(r.verdict, ConditionDVerdict::Pass);
        assert!(r.kappa < 10.0);
    }
}
