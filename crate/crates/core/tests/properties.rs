use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use globsolv::diophantine::{continued_fraction, RealInterval};
use globsolv::forms::{ConstPForm, Freq, MultiIndex, TrigPForm};
use globsolv::spectral::{apply_operator, solve_constant, SolveOptions};
use globsolv::symbols::{Coef, SystemSpec};
use globsolv::wedge::wedge_divide;
use globsolv::{GaussianRational, Scalar};

type Q = GaussianRational;

fn gauss(re: i64, im: i64) -> Q {
    Q::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn form(n: usize, degree: usize, coeffs: &[(i64, i64)]) -> ConstPForm<Q> {
    let mut f = ConstPForm::zero(n, degree);
    for (k, &(re, im)) in MultiIndex::all(n, degree).into_iter().zip(coeffs.iter().cycle()) {
        f.add_term(k, gauss(re, im));
    }
    f
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn one_form_squares_to_zero(n in 1usize..=6, c in coeffs()) {
        let l = form(n, 1, &c);
        prop_assert!(l.wedge(&l).unwrap().is_zero());
    }

    #[test]
    fn wedge_is_graded_commutative(n in 2usize..=5, p in 0usize..3, q in 0usize..3, a in coeffs(), b in coeffs()) {
        prop_assume!(p + q <= n);
        let x = form(n, p, &a);
        let y = form(n, q, &b);
        let xy = x.wedge(&y).unwrap();
        let yx = y.wedge(&x).unwrap();
        let sign = if p * q % 2 == 0 { Q::from_i128(1) } else { Q::from_i128(-1) };
        prop_assert_eq!(xy, yx.scale(&sign));
    }

    #[test]
    fn division_inverts_wedge(n in 1usize..=6, p in 0usize..5, lc in coeffs(), gc in coeffs()) {
        prop_assume!(p < n);
        let l = form(n, 1, &lc);
        prop_assume!(!l.is_zero());
        let f = l.wedge(&form(n, p, &gc)).unwrap();
        let u = wedge_divide(&l, &f).unwrap();
        prop_assert_eq!(l.wedge(&u).unwrap(), f);
    }

    #[test]
    fn operator_squares_to_zero(
        a in prop::collection::vec((-9i64..=9, 1i64..=9), 3),
        terms in prop::collection::vec((prop::collection::vec(-4i128..=4, 3), -6i128..=6, -2i64..=2), 1..6),
    ) {
        let spec = SystemSpec::linear_1d(a.iter().map(|&(n, d)| Coef::ratio(n, d)).collect()).unwrap();
        let mut u = TrigPForm::<Q>::zero(3, 1, 0);
        for (eta, xi, c) in terms {
            u.add_term(Freq::new(eta, vec![xi]), MultiIndex::EMPTY, gauss(c, 1)).unwrap();
        }
        let once = apply_operator(&spec, &u).unwrap();
        prop_assert!(apply_operator(&spec, &once).unwrap().is_zero());
    }

    #[test]
    fn exact_solve_recovers_range_elements(
        a in prop::collection::vec((-9i64..=9, 1i64..=9), 2),
        terms in prop::collection::vec((prop::collection::vec(-4i128..=4, 2), -6i128..=6, -2i64..=2), 1..6),
    ) {
        let spec = SystemSpec::linear_1d(a.iter().map(|&(n, d)| Coef::ratio(n, d)).collect()).unwrap();
        let mut u = TrigPForm::<Q>::zero(2, 1, 0);
        for (eta, xi, c) in terms {
            u.add_term(Freq::new(eta, vec![xi]), MultiIndex::EMPTY, gauss(c, -1)).unwrap();
        }
        let f = apply_operator(&spec, &u).unwrap();
        prop_assume!(!f.is_zero());
        let s = solve_constant(&spec, &f, &SolveOptions::default()).unwrap();
        prop_assert_eq!(apply_operator(&spec, &s.u).unwrap(), f);
    }

    #[test]
    fn trig_form_json_round_trips(terms in prop::collection::vec((prop::collection::vec(-50i128..=50, 2), -50i128..=50, -7i64..=7, 1i64..=7), 0..8)) {
        let mut u = TrigPForm::<Q>::zero(2, 1, 1);
        for (i, (eta, xi, n, d)) in terms.into_iter().enumerate() {
            let c = Q::new(BigRational::new(n.into(), d.into()), BigRational::new(d.into(), 3.into()));
            u.add_term(Freq::new(eta, vec![xi]), MultiIndex::single(i % 2 + 1), c).unwrap();
        }
        let back = TrigPForm::<Q>::from_json(&u.to_json()).unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn continued_fraction_ends_at_the_rational(n in -10_000i64..10_000, d in 1i64..10_000) {
        let x = BigRational::new(BigInt::from(n), BigInt::from(d));
        let cf = continued_fraction(&RealInterval::exact(x.clone()), 64).unwrap();
        prop_assert_eq!(cf.last().unwrap().value(), x);
    }
}
