//! Bundled scenarios. Each is a base config document; a user config naming
//! the scenario is merged over it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::diophantine::{lacunary_pair, liouville_truncations, sda_example_alpha};
use crate::error::{Error, Result};
use crate::normal_form::examples;
use crate::normal_form::CoefficientProfile;
use crate::scalar::format_rational;
use crate::symbols::SystemSpec;
use crate::GaussianRational;

pub const NAMES: &[&str] = &[
    "rational-a0",
    "liouville-a0",
    "golden-a0",
    "liouville-pair",
    "homogeneous",
    "mixed-growth",
    "sign-definite",
    "real-closed",
    "growing-imaginary",
    "constant-profile",
    "non-closed",
];

fn linear_system(a: &[BigRational]) -> Value {
    json!({
        "n": a.len(),
        "N": 1,
        "symbols": a.iter().map(|v| json!({"kind": "linear", "a": [format_rational(v)]})).collect::<Vec<_>>(),
    })
}

fn profile_system(spec: &SystemSpec, prof: &CoefficientProfile<GaussianRational>) -> Value {
    let mut v = spec.to_json();
    v["coefficients"] = prof.to_json();
    v
}

/// `F_{k+1} / F_k` for `k = 200`: agrees with the golden ratio to about 80 digits.
fn golden_rational() -> BigRational {
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for _ in 0..199 {
        let c = &a + &b;
        a = b;
        b = c;
    }
    BigRational::new(b, a)
}

fn reduce_base(name: &str) -> Result<Value> {
    let (spec, prof) = match name {
        "mixed-growth" => examples::mixed_growth_system(),
        "sign-definite" => examples::sign_definite_system(),
        "real-closed" => examples::real_closed_system(),
        "growing-imaginary" => examples::growing_imaginary_system(),
        "constant-profile" => (examples::real_closed_system().0, CoefficientProfile::constant(2)),
        _ => unreachable!("caller checks the name"),
    };
    let mut doc = json!({
        "system": profile_system(&spec, &prof),
        "box": {"H": 8, "X": 8},
        "arithmetic": "float",
    });
    if spec.n >= 3 {
        doc["reduce"] = json!({"degrees": [0, 1, 2]});
    }
    if name == "sign-definite" {
        // the zero-mean 𝒞 reaches |Im 𝒞| ≈ 40 on this box, so absolute
        // conjugation residuals carry no information in double precision
        doc["reduce"] = json!({"conjugation": false});
    }
    Ok(doc)
}

/// Base document of a bundled scenario.
pub fn base(name: &str) -> Result<Value> {
    let doc = match name {
        "rational-a0" => json!({
            "system": linear_system(&[BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 3.into())]),
            "box": {"H": 16, "X": 16},
            "arithmetic": "exact",
            "analyze": {"mode": "exhaustive"},
        }),
        "liouville-a0" => {
            let l5 = liouville_truncations(5)?.pop().expect("five truncations").value();
            json!({
                "system": linear_system(&[l5]),
                "box": {"H": 32, "X": 32},
                "arithmetic": "exact",
                "analyze": {"mode": "exhaustive", "alpha": ["liouville"], "ell_target": 4},
                "witness": {"p": 0, "delta": 0.25, "max_terms": 3, "min_terms": 3},
            })
        }
        "golden-a0" => json!({
            "system": linear_system(&[golden_rational()]),
            "box": {"H": 32, "X": 32},
            "arithmetic": "exact",
            "analyze": {"mode": "exhaustive", "alpha": ["golden"], "ell_target": 4},
            "witness": {"p": 0, "delta": 0.25, "max_terms": 3, "min_terms": 3},
        }),
        "liouville-pair" => {
            let [a, b] = lacunary_pair();
            json!({
                "system": linear_system(&[a.truncation(4), b.truncation(4)]),
                "box": {"H": 8, "X": 8},
                "arithmetic": "exact",
                "analyze": {"mode": "exhaustive", "alpha": ["lacunary:10", "lacunary:3"], "components": true},
            })
        }
        "homogeneous" => {
            // symbols c_j |ξ|^{1/2} with the μ = 2 Liouville-built c
            let c = sda_example_alpha(2, 50)?;
            json!({
                "system": {
                    "n": 2,
                    "N": 1,
                    "symbols": c.iter().map(|v| json!({"kind": "homogeneous", "c": v.to_f64(), "rho": 1, "mu": 2})).collect::<Vec<_>>(),
                },
                "box": {"H": 16, "X": 16},
                "arithmetic": "float",
                "analyze": {
                    "verdict": false,
                    "homogeneous": [
                        {"rho": 1, "mu": 4, "example_mu": 2, "ell_target": 1},
                        {"rho": 1, "mu": 2, "example_mu": 2, "ell_target": 2},
                    ],
                },
            })
        }
        "mixed-growth" | "sign-definite" | "real-closed" | "growing-imaginary" | "constant-profile" => reduce_base(name)?,
        "non-closed" => json!({
            // c₁ = 1 + cos t₂ with c₂ = 1 and p₁ = p₂ = ξ: ∂₂c₁ ≠ ∂₁c₂
            "system": {
                "n": 2,
                "N": 1,
                "symbols": [{"kind": "linear", "a": [1]}, {"kind": "linear", "a": [1]}],
                "coefficients": [
                    {"j": 1, "kind": "general", "terms": [
                        {"k": [0, 0], "re": 1},
                        {"k": [0, 1], "re": "1/2"},
                        {"k": [0, -1], "re": "1/2"},
                    ]},
                ],
            },
            "box": {"H": 4, "X": 4},
            "arithmetic": "float",
        }),
        other => {
            return Err(Error::Config(format!("unknown scenario {other:?}; known: {}", NAMES.join(", "))));
        }
    };
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_parses() {
        for name in NAMES {
            let doc = base(name).unwrap();
            let spec = SystemSpec::from_json(&doc["system"]).unwrap();
            let prof = CoefficientProfile::<crate::C64>::from_system_json(&doc["system"]).unwrap();
            assert_eq!(spec.n, prof.n, "{name}");
        }
        assert!(base("no-such-scenario").is_err());
    }

    #[test]
    fn golden_approximant_is_close() {
        let g = golden_rational();
        let phi = crate::diophantine::RealInterval::golden(60);
        let d = crate::diophantine::RealInterval::exact(g).add(&phi.neg());
        assert!(d.to_f64().abs() < 1e-60);
    }
}
