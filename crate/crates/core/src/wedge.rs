//! Division by a constant 1-form: solving `L ∧ U = F`.
//!
//! With a pivot `μ` such that `L_μ ≠ 0`, contracting `L ∧ F = 0` with `e_μ`
//! gives `L_μ F = L ∧ (e_μ ⌟ F)`, so `U₀ = (e_μ ⌟ F) / L_μ` solves the
//! equation. The same `μ` must be used for every `J`; mixing pivots across
//! multi-indices breaks the identity (e.g. `L = dt1 + dt2`, `F = L ∧ dt3`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::ConstPForm;
use crate::scalar::{Scalar, Tolerances};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// `μ = argmax |L_μ|` (ties to the smallest index).
    #[default]
    MaxModulus,
    /// Smallest `μ` with `L_μ ≠ 0`.
    FirstNonzero,
}

/// Quotient together with the pivot that produced it.
#[derive(Clone, Debug)]
pub struct Division<S> {
    pub u: ConstPForm<S>,
    pub pivot: usize,
}

fn check_shapes<S: Scalar>(l: &ConstPForm<S>, f: &ConstPForm<S>) -> Result<()> {
    if l.degree() != 1 {
        return Err(Error::domain(format!("divisor must be a 1-form, got degree {}", l.degree())));
    }
    if l.n() != f.n() {
        return Err(Error::domain(format!("ambient dimensions differ: {} vs {}", l.n(), f.n())));
    }
    Ok(())
}

/// `‖L ∧ F‖ / (‖L‖·‖F‖)`, zero when either factor vanishes.
pub fn compat_residual<S: Scalar>(l: &ConstPForm<S>, f: &ConstPForm<S>) -> Result<f64> {
    check_shapes(l, f)?;
    let w = l.wedge(f)?;
    let denom = l.sup_norm() * f.sup_norm();
    if w.is_zero() || denom == 0.0 {
        return Ok(if w.is_zero() { 0.0 } else { f64::INFINITY });
    }
    Ok(w.sup_norm() / denom)
}

/// `L ∧ F = 0`: literal in exact mode, relative threshold otherwise.
pub fn wedge_compat<S: Scalar>(l: &ConstPForm<S>, f: &ConstPForm<S>, tol: &Tolerances) -> Result<bool> {
    check_shapes(l, f)?;
    let w = l.wedge(f)?;
    if S::EXACT {
        return Ok(w.is_zero());
    }
    Ok(w.is_zero() || w.sup_norm() <= tol.compat_rel * l.sup_norm() * f.sup_norm())
}

pub fn pivot_index<S: Scalar>(l: &ConstPForm<S>, rule: PivotRule) -> Option<usize> {
    match rule {
        PivotRule::FirstNonzero => l.terms().next().map(|(k, _)| k.iter().next().unwrap()),
        PivotRule::MaxModulus => {
            let mut best: Option<(usize, S::Real)> = None;
            for (k, c) in l.terms() {
                let m = c.norm_sqr_real();
                let j = k.iter().next().unwrap();
                match &best {
                    Some((_, bm)) if m <= *bm => {}
                    _ => best = Some((j, m)),
                }
            }
            best.map(|(j, _)| j)
        }
    }
}

/// Particular solution `U₀` of `L ∧ U = F` with the max-modulus pivot.
pub fn wedge_divide<S: Scalar>(l: &ConstPForm<S>, f: &ConstPForm<S>) -> Result<ConstPForm<S>> {
    wedge_divide_with(l, f, PivotRule::MaxModulus, &Tolerances::default()).map(|d| d.u)
}

pub fn wedge_divide_with<S: Scalar>(
    l: &ConstPForm<S>,
    f: &ConstPForm<S>,
    rule: PivotRule,
    tol: &Tolerances,
) -> Result<Division<S>> {
    check_shapes(l, f)?;
    if f.degree() == 0 {
        return Err(Error::domain("right-hand side must have degree at least 1"));
    }
    let mu = pivot_index(l, rule).ok_or_else(|| Error::domain("divisor 1-form is zero"))?;
    if !wedge_compat(l, f, tol)? {
        return Err(Error::Precondition {
            msg: "L ∧ F ≠ 0".into(),
            residual: compat_residual(l, f)?,
        });
    }
    let inv = S::one() / l.component(mu);
    Ok(Division { u: f.interior(mu).scale(&inv), pivot: mu })
}

/// General solution `U₀ + L ∧ W`; `W` is ignored (must be absent or zero) when `p = 0`.
pub fn wedge_general<S: Scalar>(
    l: &ConstPForm<S>,
    f: &ConstPForm<S>,
    w: Option<&ConstPForm<S>>,
    rule: PivotRule,
    tol: &Tolerances,
) -> Result<ConstPForm<S>> {
    let u0 = wedge_divide_with(l, f, rule, tol)?.u;
    match w {
        None => Ok(u0),
        Some(w) if f.degree() == 1 => {
            if !w.is_zero() {
                return Err(Error::domain("W must vanish when p = 0"));
            }
            Ok(u0)
        }
        Some(w) => {
            if w.degree() + 2 != f.degree() || w.n() != l.n() {
                return Err(Error::domain(format!(
                    "W must have degree {} on C^{}",
                    f.degree() - 2,
                    l.n()
                )));
            }
            u0.add(&l.wedge(w)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GaussianRational, C64};
    use num_traits::One;

    type Q = GaussianRational;

    fn q(v: i64) -> Q {
        Q::from_i128(v as i128)
    }

    fn basis(n: usize, e: &[usize]) -> ConstPForm<Q> {
        ConstPForm::basis(n, e).unwrap()
    }

    #[test]
    fn compat_examples() {
        let t = Tolerances::default();
        assert!(wedge_compat(&basis(2, &[1]), &basis(2, &[1, 2]), &t).unwrap());
        assert!(!wedge_compat(&basis(3, &[1]), &basis(3, &[2, 3]), &t).unwrap());
        let l = basis(2, &[1]).add(&basis(2, &[2])).unwrap();
        assert!(wedge_compat(&l, &basis(2, &[1, 2]), &t).unwrap());
    }

    #[test]
    fn divide_examples() {
        let u = wedge_divide(&basis(2, &[1]), &basis(2, &[1, 2])).unwrap();
        assert_eq!(u, basis(2, &[2]));

        let l = ConstPForm::one_form(vec![q(2)]);
        let f = ConstPForm::one_form(vec![q(2)]);
        assert_eq!(wedge_divide(&l, &f).unwrap(), ConstPForm::scalar(1, Q::one()));

        let l = basis(2, &[1]).add(&basis(2, &[2])).unwrap();
        let f = basis(2, &[1, 2]);
        let u = wedge_divide_with(&l, &f, PivotRule::FirstNonzero, &Tolerances::default()).unwrap();
        assert_eq!(u.pivot, 1);
        assert_eq!(u.u, basis(2, &[2]));
        assert_eq!(l.wedge(&u.u).unwrap(), f);
    }

    #[test]
    fn mixed_pivots_would_fail() {
        // L = dt1 + dt2, F = L ∧ dt3 = dt1∧dt3 + dt2∧dt3; one global pivot is required.
        let l = basis(3, &[1]).add(&basis(3, &[2])).unwrap();
        let f = l.wedge(&basis(3, &[3])).unwrap();
        for rule in [PivotRule::MaxModulus, PivotRule::FirstNonzero] {
            let u = wedge_divide_with(&l, &f, rule, &Tolerances::default()).unwrap().u;
            assert_eq!(l.wedge(&u).unwrap(), f);
        }
        // per-J pivots: J=(1,3) with μ=1 gives dt3; J=(2,3) with μ=2 gives dt3 again
        let per_j = basis(3, &[3]).scale(&q(2));
        assert_eq!(l.wedge(&per_j).unwrap(), f.scale(&q(2)));
    }

    #[test]
    fn errors() {
        let t = Tolerances::default();
        let z = ConstPForm::<Q>::zero(2, 1);
        assert!(matches!(wedge_divide(&z, &basis(2, &[1, 2])), Err(Error::Domain(_))));
        let e = wedge_divide(&basis(3, &[1]), &basis(3, &[2, 3])).unwrap_err();
        assert!(matches!(e, Error::Precondition { .. }));
        let w = basis(2, &[1]);
        assert!(wedge_general(&basis(2, &[1]), &basis(2, &[1]), Some(&w), PivotRule::MaxModulus, &t).is_err());
    }

    #[test]
    fn general_solution_p0_is_unique() {
        let t = Tolerances::default();
        let l = ConstPForm::one_form(vec![q(3), q(-1)]);
        let f = l.scale(&q(5));
        let u = wedge_general(&l, &f, Some(&ConstPForm::zero(2, 0)), PivotRule::MaxModulus, &t).unwrap();
        assert_eq!(u, ConstPForm::scalar(2, q(5)));
    }

    #[test]
    fn float_pivot_is_max_modulus() {
        let l = ConstPForm::one_form(vec![C64::new(0.1, 0.0), C64::new(0.0, -3.0), C64::new(2.0, 0.0)]);
        assert_eq!(pivot_index(&l, PivotRule::MaxModulus), Some(2));
        assert_eq!(pivot_index(&l, PivotRule::FirstNonzero), Some(1));
    }
}
