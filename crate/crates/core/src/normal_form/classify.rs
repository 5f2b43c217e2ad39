use std::f64::consts::TAU;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::FrequencyBox;
use crate::normal_form::profile::CoefficientProfile;
use crate::normal_form::trig_poly::TrigPoly;
use crate::scalar::Scalar;
use crate::symbols::{classify_growth_fn, GrowthClass, GrowthTag, SystemSpec};
use crate::C64;

const SIGN_GRID: usize = 1 << 10;
/// Largest bandwidth for which the grid verdict is certified cell by cell.
const CERTIFY_BANDWIDTH: i64 = 64;

/// Sign behaviour of a real one-variable trigonometric polynomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignCheck {
    pub changes_sign: bool,
    pub grid_min: f64,
    pub grid_max: f64,
    /// A constant sign proved on every grid cell via the derivative bound.
    pub certified: bool,
    pub identically_zero: bool,
}

impl SignCheck {
    pub fn of(f: &TrigPoly<C64>) -> Self {
        let scale = f.sup_coeff().max(1.0);
        let tiny = 1e-12 * scale;
        if f.terms().all(|(_, c)| c.norm() <= tiny) {
            return SignCheck { changes_sign: false, grid_min: 0.0, grid_max: 0.0, certified: true, identically_zero: true };
        }
        let h = TAU / SIGN_GRID as f64;
        let vals: Vec<f64> = (0..SIGN_GRID).map(|i| f.eval_c64(&[(i as f64 + 0.5) * h]).re).collect();
        let grid_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let grid_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let changes_sign = grid_min < -tiny && grid_max > tiny;
        let certified = if changes_sign {
            true
        } else if f.bandwidth() <= CERTIFY_BANDWIDTH {
            // |f(t) − f(mid)| ≤ L h / 2 on each cell
            let slack = f.derivative_bound(1) * h / 2.0;
            vals.iter().all(|v| v.abs() > slack) && (grid_min > 0.0 || grid_max < 0.0)
        } else {
            false
        };
        SignCheck { changes_sign, grid_min, grid_max, certified, identically_zero: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JCondition {
    /// `p_j` has at most logarithmic growth.
    I,
    /// `Re p_j` logarithmic, `Im p_j` super-logarithmic, `Re c_j` of constant sign.
    Ii,
    /// The mirror of `Ii`.
    Iii,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JReport {
    pub j: usize,
    pub condition: JCondition,
    pub p_growth: GrowthClass,
    pub alpha_growth: GrowthClass,
    pub beta_growth: GrowthClass,
    pub a_sign: SignCheck,
    pub b_sign: SignCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub per_j: Vec<JReport>,
    pub l_set: Vec<usize>,
    pub reduction_applies: bool,
    pub box_x: u64,
    pub margin: f64,
}

impl ClassifierReport {
    pub fn to_json(&self) -> Value {
        let growth = |g: &GrowthClass| json!({"tag": g.tag, "ratio_statistic": finite(g.ratio_statistic), "C": g.c});
        json!({
            "per_j": self.per_j.iter().map(|r| json!({
                "j": r.j,
                "condition": r.condition,
                "details": {
                    "p": growth(&r.p_growth),
                    "alpha": growth(&r.alpha_growth),
                    "beta": growth(&r.beta_growth),
                    "a_sign": r.a_sign,
                    "b_sign": r.b_sign,
                },
            })).collect::<Vec<_>>(),
            "L_set": self.l_set,
            "reduction_applies": self.reduction_applies,
            "growth_box_X": self.box_x,
            "margin": self.margin,
        })
    }
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

/// Membership of each `j` in the index set `ℒ` for a decoupled profile.
/// Growth tags come from a finite box and are heuristic.
pub fn classify_decoupled<S: Scalar>(profile: &CoefficientProfile<S>, spec: &SystemSpec, bx: &FrequencyBox, margin: f64) -> Result<ClassifierReport> {
    if spec.n != profile.n {
        return Err(Error::domain("profile and system disagree on n"));
    }
    let cs = profile.decoupled().ok_or_else(|| Error::domain("classification needs c_j = c_j(t_j)"))?;
    let mut per_j = Vec::with_capacity(profile.n);
    for (j, c) in cs.iter().enumerate() {
        let sym = &spec.symbols[j];
        let p_growth = classify_growth_fn(spec.big_n, |xi| sym.eval_c64(xi).norm(), bx, margin)?;
        let alpha_growth = classify_growth_fn(spec.big_n, |xi| sym.eval_c64(xi).re.abs(), bx, margin)?;
        let beta_growth = classify_growth_fn(spec.big_n, |xi| sym.eval_c64(xi).im.abs(), bx, margin)?;
        let c = c.to_c64();
        let a_sign = SignCheck::of(&c.real_part());
        let b_sign = SignCheck::of(&c.imag_part());
        let log = |g: &GrowthClass| g.tag == GrowthTag::Log;
        let condition = if log(&p_growth) {
            JCondition::I
        } else if log(&alpha_growth) && !log(&beta_growth) && !a_sign.changes_sign {
            JCondition::Ii
        } else if !log(&alpha_growth) && log(&beta_growth) && !b_sign.changes_sign {
            JCondition::Iii
        } else {
            JCondition::None
        };
        per_j.push(JReport { j: j + 1, condition, p_growth, alpha_growth, beta_growth, a_sign, b_sign });
    }
    let l_set: Vec<usize> = per_j.iter().filter(|r| r.condition != JCondition::None).map(|r| r.j).collect();
    let reduction_applies = l_set.len() == profile.n;
    Ok(ClassifierReport { per_j, l_set, reduction_applies, box_x: bx.x, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::examples::*;
    use crate::normal_form::profile::CoefficientEntry;
    use crate::normal_form::trig_poly::c64;
    use crate::symbols::{Coef, ToroidalSymbol};

    fn bx() -> FrequencyBox {
        FrequencyBox::new(0, 256)
    }

    #[test]
    fn mixed_growth_in_class() {
        let (spec, prof) = mixed_growth_system();
        let r = classify_decoupled(&prof, &spec, &bx(), 0.25).unwrap();
        let conds: Vec<JCondition> = r.per_j.iter().map(|j| j.condition).collect();
        assert_eq!(conds, vec![JCondition::I, JCondition::Ii, JCondition::Iii]);
        assert!(r.reduction_applies);
        assert_eq!(r.l_set, vec![1, 2, 3]);
        assert!(r.per_j[1].a_sign.certified);
    }

    #[test]
    fn sign_change_breaks_condition_two() {
        let spec = SystemSpec::new(vec![ToroidalSymbol::poly1(vec![Coef::int(1), Coef::exact(crate::scalar::rational_from_i128(0), crate::scalar::rational_from_i128(1))])]).unwrap();
        let sin = TrigPoly::from_terms(1, [(vec![1], c64(0.0, -0.5)), (vec![-1], c64(0.0, 0.5))]).unwrap();
        let prof = CoefficientProfile::new(vec![CoefficientEntry::Decoupled(sin)]).unwrap();
        let r = classify_decoupled(&prof, &spec, &bx(), 0.25).unwrap();
        assert!(r.per_j[0].a_sign.changes_sign);
        assert_eq!(r.per_j[0].condition, JCondition::None);
        assert!(!r.reduction_applies);
    }

    #[test]
    fn sign_definite_example_outside_class() {
        let (spec, prof) = sign_definite_system();
        let r = classify_decoupled(&prof, &spec, &bx(), 0.25).unwrap();
        assert_eq!(r.per_j[0].condition, JCondition::None);
        assert!(r.l_set.is_empty());
    }

    #[test]
    fn touching_zero_is_not_a_sign_change() {
        let f = TrigPoly::from_terms(1, [(vec![0], c64(1.0, 0.0)), (vec![1], c64(0.5, 0.0)), (vec![-1], c64(0.5, 0.0))]).unwrap();
        let s = SignCheck::of(&f);
        assert!(!s.changes_sign);
        assert!(!s.certified);
        assert!(s.grid_min >= 0.0);
    }
}
