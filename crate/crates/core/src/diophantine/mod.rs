//! Rationality, Liouville and `(SDA)_μ` witnesses for constant and
//! homogeneous coefficients. Irrational inputs are rational intervals stamped
//! with their precision; verdicts carry that stamp.

pub mod cfrac;
pub mod homogeneous;
pub mod interval;
pub mod liouville;
pub mod sda;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

pub use cfrac::{continued_fraction, detect_rational, lcm_denominators, Convergent, RationalDetection};
pub use homogeneous::{
    characterize_homogeneous, classify_constant, direct_scan, liouville_seeds, sda_example_alpha, DirectRecord,
    DirectScan, HomogeneousOptions, HomogeneousReport,
};
pub use interval::RealInterval;
pub use liouville::{lacunary_pair, liouville_interval, liouville_truncations, LacunarySeries, LiouvilleTruncation};
pub use sda::{
    rational_lowerbound, rational_lowerbound_mu, sda_search, RationalLowerBound, SdaCandidate, SdaOptions, SdaResult,
    SdaTerm,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictTag {
    Rational,
    LiouvilleWitnessed,
    SdaWitnessed,
    NoWitnessFound,
    /// Nonzero imaginary part: solvable without any Diophantine input.
    BetaNonzero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictWitness {
    pub p: Vec<String>,
    pub q: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineVerdict {
    pub tag: VerdictTag,
    pub q0: Option<BigInt>,
    pub mu: Option<u32>,
    pub witness: Vec<VerdictWitness>,
    /// `u32::MAX` for exact input.
    pub precision_digits: u32,
    pub search_bounds: Value,
}

impl DiophantineVerdict {
    pub(crate) fn from_sda(tag: VerdictTag, sda: &SdaResult, digits: u32, bounds: Value) -> Self {
        let witness = sda
            .terms
            .iter()
            .map(|t| VerdictWitness {
                p: t.candidate.p.iter().map(|v| v.to_string()).collect(),
                q: t.candidate.q.to_string(),
                bound: format!("{:.6e}", crate::scalar::rational_to_f64(&t.bound)),
            })
            .collect();
        DiophantineVerdict { tag, q0: None, mu: Some(sda.mu), witness, precision_digits: digits, search_bounds: bounds }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "tag": self.tag,
            "witness": self.witness,
            "precision_digits": if self.precision_digits == u32::MAX { Value::from("exact") } else { Value::from(self.precision_digits) },
            "search_bounds": self.search_bounds,
        });
        if let Some(q0) = &self.q0 {
            v["q0"] = json!(q0.to_string());
        }
        if let Some(mu) = self.mu {
            v["mu"] = json!(mu);
        }
        v
    }
}
