use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{merge_sign, Freq, FrequencyBox, MultiIndex, TrigPForm};
use crate::normal_form::profile::{apply_variable, decompose, CoefficientProfile, NormalForm, NormalFormSlice};
use crate::normal_form::trig_poly::TrigPoly;
use crate::scalar::Tolerance;
use crate::spectral::{apply_operator, solve_constant, SolveOptions};
use crate::symbols::SystemSpec;
use crate::C64;

/// Relative size below which a Fourier tail of `e^{±i𝒞}` is dropped.
const TAIL_EPS: f64 = 1e-14;
/// Largest probe grid for the tail search.
const MAX_GRID: usize = 1 << 23;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Smallest `2^a 3^b 5^c ≥ m`.
fn smooth_size(m: usize) -> usize {
    (m..).find(|&v| {
        let mut x = v;
        for p in [2, 3, 5] {
            while x % p == 0 {
                x /= p;
            }
        }
        x == 1
    })
    .expect("unbounded range")
}

/// Tensor grid on `Tⁿ` with `dims[a]` points along axis `a`, index `Σ i_a stride_a`.
pub(crate) struct Grid {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
    plans: Vec<Plans>,
}

impl Grid {
    /// Grid exact (up to aliasing of infinite tails) for coefficients `|k_a| ≤ cap[a]`.
    pub(crate) fn for_cap(cap: &[i64]) -> Self {
        Self::with_points(&cap.iter().map(|&c| 2 * c.max(0) as usize + 2).collect::<Vec<_>>())
    }

    /// At least `m[a]` points along axis `a`.
    pub(crate) fn with_points(m: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let dims: Vec<usize> = m.iter().map(|&v| smooth_size(v.max(1))).collect();
        let mut strides = Vec::with_capacity(dims.len());
        let mut len = 1;
        for &d in &dims {
            strides.push(len);
            len *= d;
        }
        let plans = dims.iter().map(|&d| (planner.plan_fft_forward(d), planner.plan_fft_inverse(d))).collect();
        Grid { dims, strides, len, plans }
    }

    fn n(&self) -> usize {
        self.dims.len()
    }

    fn fits(&self, k: &[i64]) -> bool {
        k.iter().zip(&self.dims).all(|(&v, &d)| v.abs() <= (d as i64 - 1) / 2)
    }

    fn index(&self, k: &[i64]) -> usize {
        k.iter().zip(&self.dims).zip(&self.strides).map(|((&v, &d), &s)| v.rem_euclid(d as i64) as usize * s).sum()
    }

    /// Signed frequency of `idx` along one axis.
    fn k(&self, idx: usize, axis: usize) -> i64 {
        let d = self.dims[axis];
        let i = ((idx / self.strides[axis]) % d) as i64;
        if i > d as i64 / 2 {
            i - d as i64
        } else {
            i
        }
    }

    fn freq(&self, idx: usize) -> Vec<i64> {
        (0..self.n()).map(|a| self.k(idx, a)).collect()
    }

    fn within(&self, idx: usize, cap: &[i64]) -> bool {
        cap.iter().enumerate().all(|(a, c)| self.k(idx, a).abs() <= *c)
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        for axis in 0..self.n() {
            let (m, stride) = (self.dims[axis], self.strides[axis]);
            let fft = if inverse { &self.plans[axis].1 } else { &self.plans[axis].0 };
            let mut line = vec![C64::new(0.0, 0.0); m];
            let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for base in (0..self.len).filter(|b| (b / stride) % m == 0) {
                for (i, l) in line.iter_mut().enumerate() {
                    *l = buf[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, l) in line.iter().enumerate() {
                    buf[base + i * stride] = *l;
                }
            }
        }
    }

    /// Coefficients to point values `Σ c_k e^{ik·t}`.
    fn values(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut v = coeffs.to_vec();
        self.transform(&mut v, true);
        v
    }

    fn coeffs(&self, values: &[C64]) -> Vec<C64> {
        let mut v = values.to_vec();
        self.transform(&mut v, false);
        let s = 1.0 / self.len as f64;
        v.iter_mut().for_each(|x| *x *= s);
        v
    }

    fn zeros(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.len]
    }

    fn dense(&self, p: &TrigPoly<C64>) -> Result<Vec<C64>> {
        let mut out = self.zeros();
        for (k, c) in p.terms() {
            if !self.fits(k) {
                return Err(Error::Bandwidth(format!("frequency {k:?} does not fit a grid of shape {:?}", self.dims)));
            }
            out[self.index(k)] += *c;
        }
        Ok(out)
    }

    /// Values of `e^{i s 𝒞}`.
    fn exp_values(&self, cal: &TrigPoly<C64>, s: f64) -> Result<Vec<C64>> {
        Ok(self.values(&self.dense(cal)?).into_iter().map(|c| (C64::new(0.0, s) * c).exp()).collect())
    }
}

/// Per-axis bandwidth of `𝒞` and of the significant part of `e^{i s 𝒞}`.
fn exp_tail(cal: &TrigPoly<C64>, n: usize, s: f64) -> Result<Vec<i64>> {
    let bw: Vec<i64> = (0..n).map(|a| cal.terms().map(|(k, _)| k[a].abs()).max().unwrap_or(0)).collect();
    if cal.is_empty() {
        return Ok(bw);
    }
    let amp: f64 = cal.terms().map(|(_, c)| c.norm()).sum::<f64>() * s.abs();
    let mut guess: Vec<i64> = bw.iter().map(|&b| if b == 0 { 0 } else { b * ((1.5 * amp).ceil() as i64 + 12) }).collect();
    loop {
        let g = Grid::for_cap(&guess);
        if g.len > MAX_GRID {
            break;
        }
        let c = g.coeffs(&g.exp_values(cal, s)?);
        let top = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let mut tail = vec![0i64; n];
        for (i, x) in c.iter().enumerate() {
            if x.norm() > TAIL_EPS * top {
                for (a, t) in tail.iter_mut().enumerate() {
                    *t = (*t).max(g.k(i, a).abs());
                }
            }
        }
        if tail.iter().zip(&guess).all(|(t, g)| *g == 0 || 4 * t <= 3 * g) {
            return Ok(tail);
        }
        guess.iter_mut().for_each(|g| *g *= 2);
    }
    Err(Error::Bandwidth("the Fourier tail of exp(i C) does not settle; the box is too large".into()))
}

/// Per-axis `max |η_a|` over the `ξ`-slice of `u`.
fn slice_bandwidth(u: &TrigPForm<C64>, xi: &[i128]) -> Vec<i64> {
    let mut bw = vec![0i64; u.n()];
    for (f, _) in u.slices().filter(|(f, _)| f.xi == xi) {
        for (b, e) in bw.iter_mut().zip(&f.eta) {
            *b = (*b).max(e.unsigned_abs() as i64);
        }
    }
    bw
}

fn add_caps(parts: &[&[i64]]) -> Vec<i64> {
    (0..parts[0].len()).map(|a| parts.iter().map(|p| p[a]).sum()).collect()
}

/// All components of one `ξ`-slice as coefficient arrays on a grid.
#[derive(Clone, Debug)]
pub(crate) struct DenseSlice {
    comps: BTreeMap<MultiIndex, Vec<C64>>,
}

impl DenseSlice {
    /// With `clip`, frequencies outside the grid are dropped instead of rejected.
    fn from_form(g: &Grid, u: &TrigPForm<C64>, xi: &[i128], clip: bool) -> Result<Self> {
        let mut comps: BTreeMap<MultiIndex, Vec<C64>> = BTreeMap::new();
        for (f, v) in u.slices().filter(|(f, _)| f.xi == xi) {
            let k: Vec<i64> = f.eta.iter().map(|&e| e as i64).collect();
            if !g.fits(&k) {
                if clip {
                    continue;
                }
                return Err(Error::Bandwidth(format!("eta {k:?} does not fit a grid of shape {:?}", g.dims)));
            }
            let idx = g.index(&k);
            for (kk, c) in v.terms() {
                comps.entry(*kk).or_insert_with(|| g.zeros())[idx] += *c;
            }
        }
        Ok(DenseSlice { comps })
    }

    fn multiply(&mut self, g: &Grid, e: &[C64]) {
        for v in self.comps.values_mut() {
            let mut vals = g.values(v);
            vals.iter_mut().zip(e).for_each(|(a, b)| *a *= b);
            *v = g.coeffs(&vals);
        }
    }

    /// Zeroes `|k_a| > cap[a]`; returns the largest dropped and the largest kept modulus.
    fn truncate(&mut self, g: &Grid, cap: &[i64]) -> (f64, f64) {
        let inside: Vec<bool> = (0..g.len).map(|i| g.within(i, cap)).collect();
        let (mut dropped, mut kept) = (0.0f64, 0.0f64);
        for v in self.comps.values_mut() {
            for (x, &ok) in v.iter_mut().zip(&inside) {
                if ok {
                    kept = kept.max(x.norm());
                } else {
                    dropped = dropped.max(x.norm());
                    *x = C64::new(0.0, 0.0);
                }
            }
        }
        (dropped, kept)
    }

    /// `(d_t + i c₀ ∧)` in coefficient space.
    fn apply_const(&self, g: &Grid, c0: &[C64]) -> DenseSlice {
        let n = g.n();
        let mut out: BTreeMap<MultiIndex, Vec<C64>> = BTreeMap::new();
        for (kk, v) in &self.comps {
            for j in 1..=n {
                let s = merge_sign(MultiIndex::single(j), *kk);
                if s == 0 {
                    continue;
                }
                let dst = out.entry(kk.with(j)).or_insert_with(|| g.zeros());
                for (i, x) in v.iter().enumerate() {
                    let sym = C64::new(0.0, 1.0) * (C64::new(g.k(i, j - 1) as f64, 0.0) + c0[j - 1]);
                    dst[i] += sym * *x * s as f64;
                }
            }
        }
        DenseSlice { comps: out }
    }

    /// `(d_t + i Σ_j p_j c_j(t) dt_j ∧)`, products taken on the grid.
    fn apply_var(&self, g: &Grid, p: &[C64], c_values: &[Vec<C64>]) -> DenseSlice {
        let n = g.n();
        let mut out = self.apply_const(g, &vec![C64::new(0.0, 0.0); n]);
        let mut acc: BTreeMap<MultiIndex, Vec<C64>> = BTreeMap::new();
        for (kk, v) in &self.comps {
            let vals = g.values(v);
            for j in 1..=n {
                let s = merge_sign(MultiIndex::single(j), *kk);
                if s == 0 {
                    continue;
                }
                let f = C64::new(0.0, s as f64) * p[j - 1];
                let dst = acc.entry(kk.with(j)).or_insert_with(|| g.zeros());
                for ((d, a), c) in dst.iter_mut().zip(&vals).zip(&c_values[j - 1]) {
                    *d += f * c * a;
                }
            }
        }
        for (kk, vals) in acc {
            let dst = out.comps.entry(kk).or_insert_with(|| g.zeros());
            for (d, x) in dst.iter_mut().zip(g.coeffs(&vals)) {
                *d += x;
            }
        }
        out
    }

    fn max_diff(&self, o: &DenseSlice) -> f64 {
        let keys: BTreeSet<&MultiIndex> = self.comps.keys().chain(o.comps.keys()).collect();
        let mut m = 0.0f64;
        for k in keys {
            match (self.comps.get(k), o.comps.get(k)) {
                (Some(a), Some(b)) => a.iter().zip(b).for_each(|(x, y)| m = m.max((x - y).norm())),
                (Some(a), None) | (None, Some(a)) => a.iter().for_each(|x| m = m.max(x.norm())),
                (None, None) => {}
            }
        }
        m
    }

    fn into_form(self, g: &Grid, xi: &[i128], out: &mut TrigPForm<C64>) -> Result<()> {
        for (kk, v) in self.comps {
            for (i, x) in v.into_iter().enumerate() {
                if x.norm() > 0.0 {
                    let eta = g.freq(i).into_iter().map(|e| e as i128).collect();
                    out.add_term(Freq::new(eta, xi.to_vec()), kk, x)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiDirection {
    /// `û ↦ û e^{−i𝒞_ξ}`.
    Forward,
    /// `û ↦ û e^{+i𝒞_ξ}`.
    Inverse,
}

/// Output bandwidth cap for [`psi_apply`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiCap {
    /// `factor × max(bw(u), bw(𝒞_ξ), 1)` per slice.
    Factor(i64),
    /// `|η|_∞ ≤ cap`.
    Fixed(i64),
    /// `bw(u) + ` the measured tail of `e^{∓i𝒞_ξ}`, per axis.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiOptions {
    pub cap: PsiCap,
    /// Relative size allowed for coefficients beyond the cap.
    pub eps: f64,
    /// Error instead of silently truncating past `eps`.
    pub strict: bool,
}

impl Default for PsiOptions {
    fn default() -> Self {
        PsiOptions { cap: PsiCap::Factor(4), eps: 1e-10, strict: true }
    }
}

/// `Ψ` (or `Ψ^{-1}`): pointwise multiplication by `e^{∓i𝒞_ξ(t)}` on a grid,
/// re-expanded to coefficients.
pub fn psi_apply(nf: &NormalForm<C64>, u: &TrigPForm<C64>, dir: PsiDirection, opts: &PsiOptions) -> Result<TrigPForm<C64>> {
    let sign = if dir == PsiDirection::Forward { -1.0 } else { 1.0 };
    let mut out = TrigPForm::zero(u.n(), u.big_n(), u.degree());
    for xi in u.xi_support() {
        let s = nf.slice(&xi).ok_or_else(|| Error::domain(format!("xi = {xi:?} is outside the normal-form box")))?;
        let bu = slice_bandwidth(u, &xi);
        let tail = exp_tail(&s.cal, nf.n, sign)?;
        let natural = add_caps(&[&bu, &tail]);
        let cap = match opts.cap {
            PsiCap::Factor(f) => {
                let b = bu.iter().copied().max().unwrap_or(0).max(s.cal.bandwidth()).max(1);
                vec![f * b; nf.n]
            }
            PsiCap::Fixed(c) => vec![c; nf.n],
            PsiCap::Adaptive => natural.clone(),
        };
        let grid_cap: Vec<i64> = natural.iter().zip(&cap).map(|(a, b)| (*a).max(*b) + 2).collect();
        let g = Grid::for_cap(&grid_cap);
        let mut d = DenseSlice::from_form(&g, u, &xi, false)?;
        d.multiply(&g, &g.exp_values(&s.cal, sign)?);
        let (dropped, kept) = d.truncate(&g, &cap);
        if opts.strict && dropped > opts.eps * kept.max(f64::MIN_POSITIVE) {
            return Err(Error::Bandwidth(format!(
                "at xi = {xi:?} coefficients beyond the cap {cap:?} reach {dropped:.3e} (relative {:.3e}); use a larger cap or a smaller box",
                dropped / kept
            )));
        }
        d.into_form(&g, &xi, &mut out)?;
    }
    Ok(out)
}

/// Draws a random `p`-form with `support` frequencies in the box.
pub fn random_form(n: usize, big_n: usize, p: usize, bx: &FrequencyBox, support: usize, rng: &mut ChaCha8Rng) -> TrigPForm<C64> {
    let idx = MultiIndex::all(n, p);
    let mut u = TrigPForm::zero(n, big_n, p);
    let h = bx.h as i128;
    let x = bx.x as i128;
    for _ in 0..support {
        let eta: Vec<i128> = (0..n).map(|_| rng.gen_range(-h..=h)).collect();
        let xi: Vec<i128> = (0..big_n).map(|_| rng.gen_range(-x..=x)).collect();
        let k = idx[rng.gen_range(0..idx.len())];
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        u.add_term(Freq::new(eta, xi), k, c).expect("shapes match");
    }
    u
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugationTrial {
    pub p: usize,
    pub residual: f64,
    pub residual_half: f64,
    /// `None` when not run or when every slice has `𝒞_ξ = 0`.
    pub broken_residual: Option<f64>,
}

/// `‖Ψ 𝕃₀ Ψ^{-1} u − 𝕃 u‖_∞` over random trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugationReport {
    pub trials: Vec<ConjugationTrial>,
    /// Largest per-axis cap used.
    pub cap: Vec<i64>,
    pub max_residual: f64,
    /// Same check with every cap and grid size halved.
    pub max_residual_half: f64,
    /// Negative control: `𝒞_ξ` replaced by `𝒞_ξ / 2`.
    pub min_broken_residual: f64,
    /// `max_residual_half / max_residual`.
    pub halving_ratio: f64,
    pub truncation_dominates: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationOptions {
    pub degrees: Vec<usize>,
    pub trials_per_degree: usize,
    /// Frequencies per random form.
    pub support: usize,
    /// Isotropic cap override.
    pub cap: Option<i64>,
    pub seed: u64,
    /// Trials per degree that also run the negative control.
    pub broken_trials: usize,
}

impl Default for ConjugationOptions {
    fn default() -> Self {
        ConjugationOptions { degrees: vec![0, 1], trials_per_degree: 5, support: 3, cap: None, seed: 0, broken_trials: 2 }
    }
}

struct Conjugator<'a> {
    nf: &'a NormalForm<C64>,
    bc: Vec<i64>,
    tails: HashMap<(Vec<i128>, u64), Vec<i64>>,
}

impl Conjugator<'_> {
    fn tail(&mut self, s: &NormalFormSlice<C64>, scale: f64) -> Result<Vec<i64>> {
        let key = (s.xi.clone(), scale.to_bits());
        if let Some(t) = self.tails.get(&key) {
            return Ok(t.clone());
        }
        let cal = s.cal.scale(&C64::new(scale, 0.0));
        let t = exp_tail(&cal, self.nf.n, 1.0)?.into_iter().zip(exp_tail(&cal, self.nf.n, -1.0)?).map(|(a, b)| a.max(b)).collect::<Vec<_>>();
        self.tails.insert(key, t.clone());
        Ok(t)
    }

    /// Comparison cap `bu + T` and grid size `2bu + 3T + 1` per axis: the
    /// product `e^{-i𝒞} 𝕃₀ v` reaches `bu + 2T` and must not alias below the cap.
    fn cap(&mut self, u: &TrigPForm<C64>, xi: &[i128], scale: f64) -> Result<(Vec<i64>, Vec<usize>)> {
        let s = self.nf.slice(xi).ok_or_else(|| Error::domain("xi outside the box"))?;
        let bu = slice_bandwidth(u, xi);
        let t = self.tail(s, scale)?;
        let cap: Vec<i64> = (0..self.nf.n).map(|a| (bu[a] + t[a]).max(bu[a] + self.bc[a])).collect();
        let pts = (0..self.nf.n).map(|a| (cap[a] + bu[a] + 2 * t[a] + 1) as usize).collect();
        Ok((cap, pts))
    }

    /// Residual of one slice on `|k_a| ≤ cap[a]`, with `𝒞` scaled by `cal_scale`.
    fn residual(&self, u: &TrigPForm<C64>, lu: &TrigPForm<C64>, xi: &[i128], cap: &[i64], pts: &[usize], cal_scale: f64) -> Result<f64> {
        let g = Grid::with_points(pts);
        let s = self.nf.slice(xi).ok_or_else(|| Error::domain("xi outside the box"))?;
        let cal = s.cal.scale(&C64::new(cal_scale, 0.0));
        let e_plus = g.exp_values(&cal, 1.0)?;
        let e_minus: Vec<C64> = e_plus.iter().map(|e| e.inv()).collect();
        let mut v = DenseSlice::from_form(&g, u, xi, true)?;
        v.multiply(&g, &e_plus);
        v.truncate(&g, cap);
        let mut w = v.apply_const(&g, &s.c0);
        w.multiply(&g, &e_minus);
        w.truncate(&g, cap);
        let direct = DenseSlice::from_form(&g, lu, xi, true)?;
        Ok(w.max_diff(&direct))
    }
}

/// Checks the conjugation identity on random forms, at the natural cap and at half of it.
pub fn verify_conjugation(
    profile: &CoefficientProfile<C64>,
    spec: &SystemSpec,
    bx: &FrequencyBox,
    opts: &ConjugationOptions,
) -> Result<ConjugationReport> {
    let xis = bx.xis(spec.big_n);
    let nf = decompose(profile, spec, &xis, &Tolerance::default())?;
    let c_full: Vec<TrigPoly<C64>> = (1..=profile.n).map(|j| profile.full(j)).collect();
    let bc = (0..profile.n).map(|a| c_full.iter().flat_map(|c| c.terms().map(move |(k, _)| k[a].abs())).max().unwrap_or(0)).collect();
    let mut conj = Conjugator { nf: &nf, bc, tails: HashMap::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trials = Vec::new();
    let mut max_cap = vec![0i64; profile.n];
    for &p in &opts.degrees {
        if p >= profile.n {
            return Err(Error::domain(format!("degree {p} needs p < n = {}", profile.n)));
        }
        for t in 0..opts.trials_per_degree {
            let u = random_form(profile.n, spec.big_n, p, bx, opts.support, &mut rng);
            let lu = apply_variable(profile, spec, &u)?;
            let (mut r, mut rh, mut rb) = (0.0f64, 0.0f64, None::<f64>);
            for xi in u.xi_support() {
                let (cap, pts) = match opts.cap {
                    Some(c) => (vec![c; profile.n], vec![2 * c as usize + 2; profile.n]),
                    None => conj.cap(&u, &xi, 1.0)?,
                };
                max_cap.iter_mut().zip(&cap).for_each(|(m, c)| *m = (*m).max(*c));
                r = r.max(conj.residual(&u, &lu, &xi, &cap, &pts, 1.0)?);
                let half: Vec<i64> = cap.iter().map(|c| c / 2).collect();
                let half_pts: Vec<usize> = pts.iter().map(|p| p / 2).collect();
                rh = rh.max(conj.residual(&u, &lu, &xi, &half, &half_pts, 1.0)?);
                // slices where 𝒞 vanishes are unaffected by the broken scaling
                let live = nf.slice(&xi).is_some_and(|s| s.cal.terms().any(|(_, c)| c.norm() > 1e-12));
                if t < opts.broken_trials && live {
                    let (cap_b, pts_b) = match opts.cap {
                        Some(_) => (cap.clone(), pts.clone()),
                        None => conj.cap(&u, &xi, 0.5)?,
                    };
                    let b = conj.residual(&u, &lu, &xi, &cap_b, &pts_b, 0.5)?;
                    rb = Some(rb.map_or(b, |x| x.min(b)));
                }
            }
            trials.push(ConjugationTrial { p, residual: r, residual_half: rh, broken_residual: rb });
        }
    }
    let max_residual = trials.iter().map(|t| t.residual).fold(0.0, f64::max);
    let max_residual_half = trials.iter().map(|t| t.residual_half).fold(0.0, f64::max);
    let min_broken_residual = trials.iter().filter_map(|t| t.broken_residual).fold(f64::INFINITY, f64::min);
    let halving_ratio = max_residual_half / max_residual.max(f64::MIN_POSITIVE);
    Ok(ConjugationReport {
        cap: max_cap,
        max_residual,
        max_residual_half,
        min_broken_residual,
        halving_ratio,
        truncation_dominates: halving_ratio > 10.0,
        trials,
    })
}

/// Outcome of transporting a normal-form solution through `Ψ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    pub p: usize,
    /// `‖𝕃^p(Ψu) − Ψf₀‖_∞`.
    pub residual: f64,
    /// `‖𝕃₀ u − f₀‖_∞` of the normal-form solve.
    pub normal_form_residual: f64,
}

/// Manufactures `f₀ = 𝕃₀ u₀`, solves the normal form for `u`, and checks
/// `𝕃^p(Ψu) = Ψf₀` on the grid.
pub fn reduction_smoke(
    profile: &CoefficientProfile<C64>,
    spec: &SystemSpec,
    bx: &FrequencyBox,
    p: usize,
    support: usize,
    seed: u64,
) -> Result<ReductionReport> {
    let xis = bx.xis(spec.big_n);
    let nf = decompose(profile, spec, &xis, &Tolerance::default())?;
    let spec0 = profile.normal_form_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = random_form(profile.n, spec.big_n, p, bx, support, &mut rng);
    let f0 = apply_operator(&spec0, &u0)?;
    let sol = solve_constant(&spec0, &f0, &SolveOptions::default())?;
    let c_full: Vec<TrigPoly<C64>> = (1..=profile.n).map(|j| profile.full(j)).collect();
    let bc: Vec<i64> = (0..profile.n).map(|a| c_full.iter().flat_map(|c| c.terms().map(move |(k, _)| k[a].abs())).max().unwrap_or(0)).collect();
    let mut residual = 0.0f64;
    for xi in f0.xi_support() {
        let s = nf.slice(&xi).ok_or_else(|| Error::domain("xi outside the box"))?;
        let bu: Vec<i64> = slice_bandwidth(&sol.u, &xi).into_iter().zip(slice_bandwidth(&f0, &xi)).map(|(a, b)| a.max(b)).collect();
        let tail = exp_tail(&s.cal, profile.n, -1.0)?;
        let cap = add_caps(&[&bu, &tail, &bc]);
        let g = Grid::for_cap(&add_caps(&[&cap, &bc]));
        let c_vals: Vec<Vec<C64>> = c_full.iter().map(|c| g.dense(c).map(|d| g.values(&d))).collect::<Result<_>>()?;
        let e_minus = g.exp_values(&s.cal, -1.0)?;
        let mut psi_u = DenseSlice::from_form(&g, &sol.u, &xi, false)?;
        psi_u.multiply(&g, &e_minus);
        psi_u.truncate(&g, &cap);
        let mut lhs = psi_u.apply_var(&g, &s.p, &c_vals);
        lhs.truncate(&g, &cap);
        let mut rhs = DenseSlice::from_form(&g, &f0, &xi, false)?;
        rhs.multiply(&g, &e_minus);
        rhs.truncate(&g, &cap);
        residual = residual.max(lhs.max_diff(&rhs));
    }
    Ok(ReductionReport { p, residual, normal_form_residual: sol.residual_inf })
}
