use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{int_json, Freq, FrequencyBox};
use crate::scalar::{format_rational, rational_to_f64, Real, Scalar};
use crate::spectral::{lsq_line, round_real};
use crate::symbols::{eval_symbol_slice, slice_from_values, SystemSpec};

/// Which frequencies a scan visits.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ScanMode {
    /// Exhaustive when the box has at most `exhaustive_limit` points, else nearest-lattice.
    #[default]
    Auto,
    Exhaustive,
    /// Per `ξ`, only `η_j ∈ round(−Re p_j(ξ)) + {−1, 0, 1}`. The minimum over
    /// nonzero slices at each `ξ` is always among these.
    NearestLattice,
    /// Nearest-lattice candidates at the listed `ξ` only (may lie outside the box).
    ProbeXi(Vec<Vec<i128>>),
    /// Exactly these frequencies.
    Probes(Vec<Freq>),
}

impl ScanMode {
    fn name(&self) -> &'static str {
        match self {
            ScanMode::Auto => "auto",
            ScanMode::Exhaustive => "exhaustive",
            ScanMode::NearestLattice => "nearest_lattice",
            ScanMode::ProbeXi(_) => "probe_xi",
            ScanMode::Probes(_) => "probes",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub mode: ScanMode,
    pub exhaustive_limit: f64,
    /// Verdict threshold on `max −log‖L̂‖ / log|(η,ξ)|`.
    pub subpoly_exponent: f64,
    pub offenders: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { mode: ScanMode::Auto, exhaustive_limit: 2.0e6, subpoly_exponent: 2.5, offenders: 5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorRecord {
    pub freq: Freq,
    /// `|(η, ξ)|` in the sup norm.
    pub radius: u128,
    pub norm: f64,
    /// `‖L̂‖²`, exact in exact mode.
    pub norm_sqr: Option<BigRational>,
}

impl DivisorRecord {
    fn log_bound(&self, lambda: f64) -> f64 {
        self.norm.ln() + lambda * (self.radius as f64).ln()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eta": self.freq.eta.iter().map(|&v| int_json(v)).collect::<Vec<_>>(),
            "xi": self.freq.xi.iter().map(|&v| int_json(v)).collect::<Vec<_>>(),
            "radius": int_json(self.radius as i128),
            "norm": self.norm,
            "norm_sqr_exact": self.norm_sqr.as_ref().map(format_rational),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVerdict {
    PlausiblyHolds,
    PlausiblyFails,
}

/// Finite-box evidence for `‖L̂(η,ξ)‖ ≥ C |(η,ξ)|^{−λ}`.
#[derive(Clone, Debug)]
pub struct DivisorScan {
    pub bx: FrequencyBox,
    pub mode: &'static str,
    /// Nonzero slices, in deterministic order.
    pub records: Vec<DivisorRecord>,
    pub zero_slices: usize,
    pub lambda_hat: f64,
    pub c_hat: f64,
    pub min_divisor: f64,
    pub min_divisor_sqr_exact: Option<BigRational>,
    pub min_record: Option<DivisorRecord>,
    pub offenders: Vec<DivisorRecord>,
    /// `max −log‖L̂‖ / log|(η,ξ)|` over records with radius ≥ 2.
    pub worst_exponent: f64,
    pub verdict: ScanVerdict,
}

impl DivisorScan {
    pub fn to_json(&self) -> Value {
        json!({
            "box": self.bx,
            "mode": self.mode,
            "records": self.records.len(),
            "zero_slices": self.zero_slices,
            "lambda_hat": self.lambda_hat,
            "C_hat": self.c_hat,
            "min_divisor": self.min_divisor,
            "min_divisor_sqr_exact": self.min_divisor_sqr_exact.as_ref().map(format_rational),
            "min_record": self.min_record.as_ref().map(DivisorRecord::to_json),
            "offenders": self.offenders.iter().map(DivisorRecord::to_json).collect::<Vec<_>>(),
            "worst_exponent": self.worst_exponent,
            "verdict": self.verdict,
            "empirical": true,
        })
    }

    /// `radius,norm` rows for scatter plots.
    pub fn scatter_csv(&self) -> String {
        let mut s = String::from("eta,xi,radius,norm\n");
        for r in &self.records {
            let join = |v: &[i128]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            s.push_str(&format!("{},{},{},{:e}\n", join(&r.freq.eta), join(&r.freq.xi), r.radius, r.norm));
        }
        s
    }
}

fn record<S: Scalar>(spec: &SystemSpec, freq: Freq, p: &[S]) -> Option<DivisorRecord> {
    let l = slice_from_values(&freq.eta, p);
    if l.is_zero() {
        return None;
    }
    let sq = l.sup_norm_sqr();
    let (norm, norm_sqr) = match sq.to_rational() {
        Some(r) => (rational_to_f64(&r).sqrt(), Some(r)),
        None => (sq.to_f64().sqrt(), None),
    };
    debug_assert_eq!(freq.eta.len(), spec.n);
    Some(DivisorRecord { radius: freq.norm(), freq, norm, norm_sqr })
}

fn nearest_candidates<S: Scalar>(p: &[S], h: Option<u64>) -> Result<Vec<Vec<i128>>> {
    let mut out: Vec<Vec<i128>> = vec![Vec::new()];
    for pj in p {
        let c = -round_real(pj.re())?;
        let mut next = Vec::new();
        for prefix in &out {
            for d in [-1i128, 0, 1] {
                let v = c + d;
                if let Some(h) = h {
                    if v.unsigned_abs() > h as u128 {
                        continue;
                    }
                }
                let mut q = prefix.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Records `‖L̂(η, ξ)‖` over the box and fits `(λ̂, Ĉ)` to the lower envelope.
pub fn divisor_scan<S: Scalar>(spec: &SystemSpec, bx: &FrequencyBox, opts: &ScanOptions) -> Result<DivisorScan> {
    let mode = match &opts.mode {
        ScanMode::Auto => {
            if bx.count(spec.n, spec.big_n) <= opts.exhaustive_limit {
                ScanMode::Exhaustive
            } else {
                ScanMode::NearestLattice
            }
        }
        m => m.clone(),
    };
    let per_xi = |xi: &Vec<i128>, exhaustive: bool, h: Option<u64>| -> Result<(Vec<DivisorRecord>, usize)> {
        let p = spec.p_values::<S>(xi)?;
        let etas = if exhaustive { bx.etas(spec.n) } else { nearest_candidates(&p, h)? };
        let mut recs = Vec::with_capacity(etas.len());
        let mut zeros = 0;
        for eta in etas {
            match record(spec, Freq::new(eta, xi.clone()), &p) {
                Some(r) => recs.push(r),
                None => zeros += 1,
            }
        }
        Ok((recs, zeros))
    };
    let chunks: Vec<Result<(Vec<DivisorRecord>, usize)>> = match &mode {
        ScanMode::Exhaustive => bx.xis(spec.big_n).par_iter().map(|xi| per_xi(xi, true, None)).collect(),
        ScanMode::NearestLattice => bx.xis(spec.big_n).par_iter().map(|xi| per_xi(xi, false, Some(bx.h))).collect(),
        ScanMode::ProbeXi(xis) => xis.par_iter().map(|xi| per_xi(xi, false, None)).collect(),
        ScanMode::Probes(fs) => fs
            .par_iter()
            .map(|f| {
                let l = eval_symbol_slice::<S>(spec, &f.eta, &f.xi)?;
                let p: Vec<S> = (1..=spec.n).map(|j| l.component(j) * -S::i() - S::from_i128(f.eta[j - 1])).collect();
                Ok(match record(spec, f.clone(), &p) {
                    Some(r) => (vec![r], 0),
                    None => (vec![], 1),
                })
            })
            .collect(),
        ScanMode::Auto => unreachable!(),
    };
    let mut records = Vec::new();
    let mut zero_slices = 0;
    for c in chunks {
        let (r, z) = c?;
        records.extend(r);
        zero_slices += z;
    }
    if records.is_empty() && zero_slices == 0 {
        return Err(Error::domain("scan visited no frequencies"));
    }
    Ok(summarize(*bx, mode.name(), records, zero_slices, opts))
}

fn summarize(
    bx: FrequencyBox,
    mode: &'static str,
    records: Vec<DivisorRecord>,
    zero_slices: usize,
    opts: &ScanOptions,
) -> DivisorScan {
    let fit: Vec<&DivisorRecord> = records.iter().filter(|r| r.radius >= 1).collect();
    // lower envelope: per dyadic shell of radius, the smallest divisor
    let mut bins: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for r in &fit {
        let key = 127 - r.radius.leading_zeros();
        let pt = ((r.radius as f64).ln(), r.norm.ln());
        bins.entry(key).and_modify(|b| if pt.1 < b.1 { *b = pt }).or_insert(pt);
    }
    let env: Vec<(f64, f64)> = bins.values().copied().collect();
    let lambda_hat = lsq_line(&env).map(|(_, b)| (-b).max(0.0)).unwrap_or(0.0);
    let mut ranked: Vec<&DivisorRecord> = fit.clone();
    ranked.sort_by(|a, b| {
        a.log_bound(lambda_hat)
            .partial_cmp(&b.log_bound(lambda_hat))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.freq.cmp(&b.freq))
    });
    let c_hat = ranked.first().map(|r| r.log_bound(lambda_hat).exp()).unwrap_or(f64::INFINITY);
    let offenders: Vec<DivisorRecord> = ranked.iter().take(opts.offenders).map(|r| (*r).clone()).collect();
    let mut min_record: Option<&DivisorRecord> = None;
    for r in &fit {
        let better = match min_record {
            None => true,
            Some(m) => match (&r.norm_sqr, &m.norm_sqr) {
                (Some(a), Some(b)) => a < b || (a == b && r.freq < m.freq),
                _ => r.norm < m.norm || (r.norm == m.norm && r.freq < m.freq),
            },
        };
        if better {
            min_record = Some(r);
        }
    }
    let worst_exponent = fit
        .iter()
        .filter(|r| r.radius >= 2)
        .map(|r| -r.norm.ln() / (r.radius as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if worst_exponent > opts.subpoly_exponent { ScanVerdict::PlausiblyFails } else { ScanVerdict::PlausiblyHolds };
    DivisorScan {
        bx,
        mode,
        zero_slices,
        lambda_hat,
        c_hat,
        min_divisor: min_record.map(|r| r.norm).unwrap_or(f64::INFINITY),
        min_divisor_sqr_exact: min_record.and_then(|r| r.norm_sqr.clone()),
        min_record: min_record.cloned(),
        offenders,
        worst_exponent,
        verdict,
        records,
    }
}
