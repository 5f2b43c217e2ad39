use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cli::scenarios;
use crate::error::{Error, Result};
use crate::forms::FrequencyBox;
use crate::scalar::Tolerances;

/// Arithmetic used by the algebraic stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    #[default]
    Float,
    Exact,
}

impl Arith {
    pub fn name(self) -> &'static str {
        match self {
            Arith::Float => "float",
            Arith::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "X")]
    pub x: u64,
}

impl From<BoxConfig> for FrequencyBox {
    fn from(b: BoxConfig) -> Self {
        FrequencyBox::new(b.h, b.x)
    }
}

/// One `D_t + c|D_x|^{ρ/μ}` case of the homogeneous analysis.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousCase {
    pub rho: u32,
    pub mu: u32,
    /// Real parts as alpha tokens; omitted when `example_mu` builds them.
    #[serde(default)]
    pub c_re: Vec<String>,
    #[serde(default)]
    pub c_im: Vec<String>,
    /// Use the Liouville-built vector whose `μ`-th power is `ℒ^μ (3/2, 3·2^{μ−1})`.
    pub example_mu: Option<u32>,
    #[serde(default = "d_digits")]
    pub digits: u32,
    #[serde(default = "d_q_max")]
    pub q_max: u64,
    #[serde(default = "d_ell")]
    pub ell_target: usize,
    #[serde(default = "d_kmax")]
    pub seed_kmax: u32,
    #[serde(default = "d_mult")]
    pub seed_multipliers: u64,
    #[serde(default = "d_scan_x")]
    pub scan_x: u64,
    #[serde(default = "d_subpoly_h")]
    pub subpoly_exponent: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    /// `auto`, `exhaustive`, `nearest_lattice` or `probe_xi`.
    pub mode: String,
    pub probe_xi: Vec<Value>,
    pub exhaustive_limit: f64,
    pub subpoly_exponent: f64,
    pub offenders: usize,
    /// Tokens: `p/q`, decimals, `golden`, `liouville`, `sqrt(r)`, `lacunary:10`, `lacunary:3`.
    pub alpha: Option<Vec<String>>,
    pub digits: u32,
    pub q_max: u64,
    pub ell_target: usize,
    pub seed_kmax: u32,
    pub seed_multipliers: u64,
    /// Explicit seed denominators; otherwise derived from the alpha tokens.
    pub seeds: Option<Vec<String>>,
    /// Also classify each component on its own.
    pub components: bool,
    pub verdict: bool,
    pub homogeneous: Vec<HomogeneousCase>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            mode: "auto".into(),
            probe_xi: vec![],
            exhaustive_limit: 2.0e6,
            subpoly_exponent: 2.5,
            offenders: 5,
            alpha: None,
            digits: d_digits(),
            q_max: d_q_max(),
            ell_target: d_ell(),
            seed_kmax: d_kmax(),
            seed_multipliers: d_mult(),
            seeds: None,
            components: false,
            verdict: true,
            homogeneous: vec![],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manufactured {
    pub p: usize,
    #[serde(default = "d_support")]
    pub support: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Right-hand side as a TrigPForm document.
    pub f: Option<Value>,
    /// Path to a TrigPForm document, relative to the config file.
    pub f_path: Option<PathBuf>,
    /// Random `u` of degree `p`; the right-hand side is `𝕃^p u`.
    pub manufactured: Option<Manufactured>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqConfig {
    pub eta: Value,
    pub xi: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessConfig {
    pub p: usize,
    pub delta: f64,
    /// Fixed witness frequencies; otherwise candidates come from continued fractions.
    pub frequencies: Option<Vec<FreqConfig>>,
    pub cf_depth: usize,
    pub max_terms: usize,
    pub min_terms: usize,
    pub train: usize,
    pub lambda_hat: Option<f64>,
    pub degree: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig { p: 0, delta: 0.25, frequencies: None, cf_depth: 400, max_terms: 3, min_terms: 3, train: 2, lambda_hat: None, degree: 10.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceConfig {
    /// Box for the growth classifier, which needs a longer `ξ` range than the conjugation check.
    pub classify_box: BoxConfig,
    pub margin: f64,
    pub degrees: Vec<usize>,
    pub trials_per_degree: usize,
    pub support: usize,
    pub broken_trials: usize,
    pub kappa_max: f64,
    /// Run the conjugation check and the reduction smoke test.
    pub conjugation: bool,
    pub smoke_degree: usize,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            classify_box: BoxConfig { h: 0, x: 256 },
            margin: 0.25,
            degrees: vec![0, 1],
            trials_per_degree: 3,
            support: 3,
            broken_trials: 1,
            kappa_max: 20.0,
            conjugation: true,
            smoke_degree: 0,
        }
    }
}

/// The merged configuration document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub system: Option<Value>,
    #[serde(rename = "box", default)]
    pub bx: Option<BoxConfig>,
    #[serde(default)]
    pub arithmetic: Option<Arith>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub witness: WitnessConfig,
    #[serde(default)]
    pub reduce: ReduceConfig,
}

fn d_digits() -> u32 {
    50
}
fn d_q_max() -> u64 {
    10_000
}
fn d_ell() -> usize {
    3
}
fn d_kmax() -> u32 {
    4
}
fn d_mult() -> u64 {
    64
}
fn d_scan_x() -> u64 {
    100_000
}
fn d_subpoly_h() -> f64 {
    3.0
}
fn d_support() -> usize {
    4
}

/// A loaded configuration with its canonical hash.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: Config,
    /// Canonical merged document (sorted keys).
    pub canonical: String,
    pub hash: String,
    pub base_dir: PathBuf,
}

impl Loaded {
    pub fn frequency_box(&self) -> Result<FrequencyBox> {
        let b = self.config.bx.ok_or_else(|| Error::Config("box is required".into()))?;
        if b.h == 0 && b.x == 0 {
            return Err(Error::Config("box is empty: H = X = 0".into()));
        }
        Ok(b.into())
    }

    pub fn system_value(&self) -> Result<&Value> {
        self.config.system.as_ref().ok_or_else(|| Error::Config("system is required".into()))
    }
}

fn located(text: &str, e: serde_json::Error) -> Error {
    let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
    Error::Config(format!("line {} column {}: {e}\n  | {line}", e.line(), e.column()))
}

/// Deep merge: objects merge key by key, everything else is replaced.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses a config document. Syntax and schema errors of the user document
/// carry line and column; a named scenario supplies defaults underneath it.
pub fn parse(text: &str, base_dir: &Path) -> Result<Loaded> {
    let user: Value = serde_json::from_str(text).map_err(|e| located(text, e))?;
    serde_json::from_str::<Config>(text).map_err(|e| located(text, e))?;
    let mut merged = match user.get("scenario").and_then(Value::as_str) {
        Some(name) => scenarios::base(name)?,
        None => Value::Object(Default::default()),
    };
    merge(&mut merged, user);
    let config: Config = serde_json::from_value(merged.clone()).map_err(|e| Error::Config(format!("merged scenario: {e}")))?;
    let canonical = serde_json::to_string(&merged)?;
    let hash = Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Loaded { config, canonical, hash, base_dir: base_dir.to_path_buf() })
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_has_line() {
        let e = parse("{\n  \"box\": {\"H\": 1,\n  \"X\": }\n}", Path::new(".")).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn unknown_field_rejected() {
        let e = parse("{\"bx\": {\"H\": 1, \"X\": 1}}", Path::new(".")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = parse(r#"{"box": {"H": 1, "X": 2}, "tolerances": {"zero_rel": 1e-9}}"#, Path::new(".")).unwrap();
        let b = parse(r#"{"tolerances": {"zero_rel": 1e-9}, "box": {"X": 2, "H": 1}}"#, Path::new(".")).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.config.tolerances.zero_rel, 1e-9);
        assert_eq!(a.config.tolerances.compat_rel, Tolerances::default().compat_rel);
    }

    #[test]
    fn empty_box_is_a_config_error() {
        let l = parse(r#"{"box": {"H": 0, "X": 0}}"#, Path::new(".")).unwrap();
        assert!(matches!(l.frequency_box(), Err(Error::Config(_))));
    }

    #[test]
    fn merge_replaces_leaves_and_keeps_siblings() {
        let mut a = serde_json::json!({"x": {"y": 1, "z": [1, 2]}, "w": 0});
        merge(&mut a, serde_json::json!({"x": {"z": [3]}}));
        assert_eq!(a, serde_json::json!({"x": {"y": 1, "z": [3]}, "w": 0}));
    }
}
