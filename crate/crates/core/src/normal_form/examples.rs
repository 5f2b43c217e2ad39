//! Reference systems with trigonometric-polynomial coefficients.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::normal_form::profile::{CoefficientEntry, CoefficientProfile};
use crate::normal_form::trig_poly::TrigPoly;
use crate::symbols::{Coef, ParityCond, Piece, SignCond, SymbolKind, SystemSpec, ToroidalSymbol};
use crate::GaussianRational;

type Q = GaussianRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigRational::new(n.into(), d.into()), BigRational::zero())
}

fn qi(n: i64, d: i64) -> Q {
    Q::new(BigRational::zero(), BigRational::new(n.into(), d.into()))
}

/// `c₀ + a cos t + b sin t` in one variable.
fn cos_sin(c0: Q, a: Q, b: Q) -> TrigPoly<Q> {
    let half = q(1, 2);
    let e1 = a.clone() * half.clone() + b.clone() * half.clone() / Q::i();
    let em1 = a * half.clone() - b * half / Q::i();
    TrigPoly::from_terms(1, [(vec![0], c0), (vec![1], e1), (vec![-1], em1)]).expect("n = 1")
}

/// `d_t + a(t) ∧ ∂_x` on `T² × T¹` with the real closed form
/// `a = (1/2 + cos(t₁+t₂)) dt₁ + (1/3 + cos(t₁+t₂)) dt₂`.
pub fn real_closed_system() -> (SystemSpec, CoefficientProfile<Q>) {
    let spec = SystemSpec::linear_1d(vec![Coef::int(1), Coef::int(1)]).expect("valid");
    let wave = |c0: Q| TrigPoly::from_terms(2, [(vec![0, 0], c0), (vec![1, 1], q(1, 2)), (vec![-1, -1], q(1, 2))]).expect("n = 2");
    let prof = CoefficientProfile::new(vec![CoefficientEntry::General(wave(q(1, 2))), CoefficientEntry::General(wave(q(1, 3)))]).expect("valid");
    (spec, prof)
}

/// Three decoupled equations on `T³ × T¹`: `p₁ = log(1+|ξ|)`, `p₂ = 1 + iξ`,
/// `p₃ = ξ`, with `c₁, c₃` real and `Re c₂ > 0`.
pub fn mixed_growth_system() -> (SystemSpec, CoefficientProfile<Q>) {
    let spec = SystemSpec::new(vec![
        ToroidalSymbol::logarithmic(1, Coef::int(1)),
        ToroidalSymbol::poly1(vec![Coef::int(1), Coef::exact(BigRational::zero(), BigRational::one())]),
        ToroidalSymbol::linear(vec![Coef::int(1)]),
    ])
    .expect("valid");
    let prof = CoefficientProfile::new(vec![
        CoefficientEntry::Decoupled(cos_sin(q(1, 1), q(1, 2), q(0, 1))),
        CoefficientEntry::Decoupled(cos_sin(q(2, 1), q(1, 4), qi(1, 4))),
        CoefficientEntry::Decoupled(cos_sin(q(1, 1), q(0, 1), q(1, 2))),
    ])
    .expect("valid");
    (spec, prof)
}

/// `p = iξ`, `c = 1 + cos(t)/2`: `Im 𝒞_ξ` grows linearly in `ξ`.
pub fn growing_imaginary_system() -> (SystemSpec, CoefficientProfile<Q>) {
    let spec = SystemSpec::linear_1d(vec![Coef::exact(BigRational::zero(), BigRational::one())]).expect("valid");
    let prof = CoefficientProfile::new(vec![CoefficientEntry::Decoupled(cos_sin(q(1, 1), q(1, 2), q(0, 1)))]).expect("valid");
    (spec, prof)
}

/// `p = α + iβ` with `α = ξ^{-1}` (odd `ξ < 0`), `|ξ|` (even `ξ ≤ 0`), `0` (`ξ > 0`)
/// and `β = 1` (`ξ ≤ 0`), `ξ` (`ξ > 0`); `c = a + ib` with
/// `a = −(1 + sin s)⁴` and `b = −(1 − sin s)⁴ / 2`, both nonpositive.
pub fn sign_definite_system() -> (SystemSpec, CoefficientProfile<Q>) {
    let poly = |terms: Vec<(Coef, i32)>| SymbolKind::Polynomial(terms.into_iter().map(|(c, e)| (c, vec![e])).collect());
    let i = Coef::exact(BigRational::zero(), BigRational::one());
    let pieces = vec![
        Piece { sign: SignCond::Neg, parity: ParityCond::Odd, value: poly(vec![(Coef::int(1), -1), (i.clone(), 0)]) },
        Piece { sign: SignCond::NonPos, parity: ParityCond::Even, value: poly(vec![(Coef::int(-1), 1), (i.clone(), 0)]) },
        Piece { sign: SignCond::Pos, parity: ParityCond::Any, value: poly(vec![(i, 1)]) },
    ];
    let spec = SystemSpec::new(vec![ToroidalSymbol::new(1, 1.0, SymbolKind::Piecewise(pieces))]).expect("valid");
    let fourth = |s: Q| {
        let base = cos_sin(q(1, 1), q(0, 1), s);
        let sq = base.mul(&base);
        sq.mul(&sq)
    };
    let a = fourth(q(1, 1)).scale(&q(-1, 1));
    let b = fourth(q(-1, 1)).scale(&q(-1, 2));
    let c = a.add(&b.scale(&Q::i()));
    let prof = CoefficientProfile::new(vec![CoefficientEntry::Decoupled(c)]).expect("valid");
    (spec, prof)
}
