use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::cli::config::{load, Arith, HomogeneousCase, Loaded};
use crate::cli::exit_code;
use crate::diophantine::{
    characterize_homogeneous, classify_constant, continued_fraction, detect_rational, lacunary_pair, liouville_interval,
    liouville_seeds, sda_example_alpha, DiophantineVerdict, HomogeneousOptions, RealInterval, VerdictTag,
};
use crate::error::{Error, Result};
use crate::forms::{int_vec, Freq, FrequencyBox, MultiIndex, TrigPForm};
use crate::normal_form::{
    check_closedness, check_condition_d, classify_decoupled, decompose, reduction_smoke, verify_conjugation, CoefficientProfile,
    ConditionDOptions, ConjugationOptions,
};
use crate::scalar::{parse_rational, Scalar, Tolerances};
use crate::spectral::{
    apply_operator, build_witness, demonstrate_blowup, divisor_scan, solve_constant, BlowupOptions, ScanMode, ScanOptions,
    SolveOptions, WitnessSequence,
};
use crate::symbols::SystemSpec;
use crate::{GaussianRational, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Solve,
    Witness,
    Reduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Solve => "solve",
            Command::Witness => "witness",
            Command::Reduce => "reduce",
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub arith: Option<Arith>,
    pub seed: u64,
}

struct Ctx<'a> {
    loaded: &'a Loaded,
    arith: Arith,
    seed: u64,
    tol: Tolerances,
}

/// Command body plus extra files for the output directory.
type Outcome = (Value, Vec<(&'static str, String)>);

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn header(cmd: Command, ctx: &Ctx) -> Map<String, Value> {
    let c = &ctx.loaded.config;
    let mut m = Map::new();
    m.insert("command".into(), json!(cmd.name()));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config_hash".into(), json!(ctx.loaded.hash));
    m.insert("scenario".into(), json!(c.scenario));
    m.insert("box".into(), json!(c.bx.map(|b| json!({"H": b.h, "X": b.x}))));
    m.insert("tolerances".into(), json!(ctx.tol));
    m.insert("seed".into(), json!(ctx.seed));
    m.insert(
        "precision".into(),
        json!({
            "arithmetic": ctx.arith.name(),
            "float_epsilon": (ctx.arith == Arith::Float).then_some(f64::EPSILON),
        }),
    );
    m
}

/// Loads the config, runs one command and writes `report.json` plus the
/// command's artifacts into `out`. Failures with a dedicated exit code still
/// leave a report describing them.
pub fn run(cmd: Command, config: &Path, out: &Path, opts: &RunOptions) -> Result<()> {
    let loaded = load(config)?;
    let ctx = Ctx {
        loaded: &loaded,
        arith: opts.arith.or(loaded.config.arithmetic).unwrap_or_default(),
        seed: opts.seed,
        tol: loaded.config.tolerances,
    };
    let result = match cmd {
        Command::Analyze => analyze(&ctx),
        Command::Solve => match ctx.arith {
            Arith::Exact => solve::<GaussianRational>(&ctx),
            Arith::Float => solve::<C64>(&ctx),
        },
        Command::Witness => match ctx.arith {
            Arith::Exact => witness::<GaussianRational>(&ctx),
            Arith::Float => witness::<C64>(&ctx),
        },
        Command::Reduce => reduce(&ctx),
    };
    let mut report = header(cmd, &ctx);
    match result {
        Ok((body, files)) => {
            std::fs::create_dir_all(out)?;
            report.insert("status".into(), json!("ok"));
            if let Value::Object(b) = body {
                report.extend(b);
            }
            std::fs::write(out.join("report.json"), pretty(&Value::Object(report))?)?;
            for (name, text) in files {
                std::fs::write(out.join(name), text)?;
            }
            Ok(())
        }
        Err(e) => {
            let code = exit_code(&e);
            if (3..=5).contains(&code) {
                std::fs::create_dir_all(out)?;
                report.insert("status".into(), json!("error"));
                report.insert("error".into(), json!({"exit_code": code, "message": e.to_string()}));
                std::fs::write(out.join("report.json"), pretty(&Value::Object(report))?)?;
            }
            Err(e)
        }
    }
}

fn system(ctx: &Ctx) -> Result<SystemSpec> {
    SystemSpec::from_json(ctx.loaded.system_value()?)
}

/// `α_j` with `p_j(ξ) = α_j ξ` when every symbol is exact, real and linear in one variable.
pub fn linear_alpha(spec: &SystemSpec) -> Option<Vec<BigRational>> {
    if spec.big_n != 1 {
        return None;
    }
    spec.symbols
        .iter()
        .map(|s| {
            let a = s.eval_exact(&[1]).ok()?;
            let ok = [2i128, -3, 7].iter().all(|&x| {
                s.eval_exact(&[x]).is_ok_and(|v| v.im.is_zero() && v.re == &a.re * BigRational::from_integer(x.into()))
            });
            (ok && a.im.is_zero()).then_some(a.re)
        })
        .collect()
}

/// Parses one alpha token into an interval plus its natural seed denominators.
fn alpha_token(tok: &str, digits: u32, kmax: u32) -> Result<(RealInterval, Vec<BigInt>)> {
    let t = tok.trim();
    Ok(match t {
        "golden" => (RealInterval::golden(digits), vec![]),
        "liouville" => (liouville_interval(digits)?, liouville_seeds(1, kmax)?),
        "lacunary:10" | "lacunary:3" => {
            let [a, b] = lacunary_pair();
            let s = if t.ends_with(":10") { a } else { b };
            (s.interval(), s.seeds())
        }
        _ if t.starts_with("sqrt(") && t.ends_with(')') => (RealInterval::sqrt(&parse_rational(&t[5..t.len() - 1])?, digits)?, vec![]),
        _ if t.contains('.') => (RealInterval::from_decimal(t)?, vec![]),
        _ => (RealInterval::exact(parse_rational(t)?), vec![]),
    })
}

fn alpha_tokens(toks: &[String], digits: u32, kmax: u32) -> Result<(Vec<RealInterval>, Vec<BigInt>)> {
    let mut iv = Vec::new();
    let mut seeds = Vec::new();
    for t in toks {
        let (i, s) = alpha_token(t, digits, kmax).map_err(|e| Error::Config(format!("alpha token {t:?}: {e}")))?;
        iv.push(i);
        seeds.extend(s);
    }
    seeds.sort();
    seeds.dedup();
    Ok((iv, seeds))
}

/// Verdict for a constant real coefficient; a rational input whose `q₀` is too
/// large for the `C₀` brute force keeps its verdict without the bound.
fn constant_verdict(alpha: &[RealInterval], opts: &HomogeneousOptions) -> Result<Value> {
    match classify_constant(alpha, opts) {
        Ok((v, details)) => Ok(json!({"verdict": v.to_json(), "details": details})),
        Err(Error::Resource(msg)) => {
            let q0 = detect_rational(alpha)?.q0().cloned();
            let v = DiophantineVerdict {
                tag: VerdictTag::Rational,
                q0,
                mu: None,
                witness: vec![],
                precision_digits: alpha.iter().map(RealInterval::certified_digits).min().unwrap_or(u32::MAX),
                search_bounds: json!({}),
            };
            Ok(json!({"verdict": v.to_json(), "details": {"lower_bound": null, "note": msg}}))
        }
        Err(e) => Err(e),
    }
}

fn homogeneous_case(case: &HomogeneousCase) -> Result<Value> {
    let (c_re, seeds) = match case.example_mu {
        Some(m) => (sda_example_alpha(m, case.digits)?, liouville_seeds(case.mu, case.seed_kmax)?),
        None => {
            let (iv, _) = alpha_tokens(&case.c_re, case.digits, case.seed_kmax)?;
            (iv, vec![])
        }
    };
    let c_im = if case.c_im.is_empty() {
        vec![RealInterval::int(0); c_re.len()]
    } else {
        alpha_tokens(&case.c_im, case.digits, case.seed_kmax)?.0
    };
    let opts = HomogeneousOptions {
        q_max: case.q_max,
        ell_target: case.ell_target,
        seeds,
        seed_multipliers: case.seed_multipliers,
        scan_x: case.scan_x,
        subpoly_exponent: case.subpoly_exponent,
    };
    let r = characterize_homogeneous(&c_re, &c_im, case.rho, case.mu, &opts)?;
    Ok(json!({"kappa": format!("{}/{}", case.rho, case.mu), "report": r.to_json()}))
}

fn analyze(ctx: &Ctx) -> Result<Outcome> {
    let bx = ctx.loaded.frequency_box()?;
    let spec = system(ctx)?;
    let a = &ctx.loaded.config.analyze;
    let mode = match a.mode.as_str() {
        "auto" => ScanMode::Auto,
        "exhaustive" => ScanMode::Exhaustive,
        "nearest_lattice" => ScanMode::NearestLattice,
        "probe_xi" => ScanMode::ProbeXi(
            a.probe_xi
                .iter()
                .map(|v| if v.is_array() { int_vec(Some(v)) } else { int_vec(Some(&json!([v]))) })
                .collect::<Result<_>>()?,
        ),
        other => return Err(Error::Config(format!("analyze.mode {other:?} is not one of auto, exhaustive, nearest_lattice, probe_xi"))),
    };
    let opts = ScanOptions { mode, exhaustive_limit: a.exhaustive_limit, subpoly_exponent: a.subpoly_exponent, offenders: a.offenders };
    let scan = match ctx.arith {
        Arith::Exact => divisor_scan::<GaussianRational>(&spec, &bx, &opts)?,
        Arith::Float => divisor_scan::<C64>(&spec, &bx, &opts)?,
    };
    let mut body = json!({"scan": scan.to_json()});
    if a.verdict {
        let (alpha, seeds) = match &a.alpha {
            Some(t) => alpha_tokens(t, a.digits, a.seed_kmax)?,
            None => match linear_alpha(&spec) {
                Some(v) => (v.into_iter().map(RealInterval::exact).collect(), vec![]),
                None => {
                    return Err(Error::Config("the verdict needs analyze.alpha or exact real linear symbols with N = 1".into()));
                }
            },
        };
        let seeds = match &a.seeds {
            Some(s) => s.iter().map(|v| v.parse::<BigInt>().map_err(|_| Error::Config(format!("seed {v:?} is not an integer")))).collect::<Result<_>>()?,
            None => seeds,
        };
        let hopts = HomogeneousOptions { q_max: a.q_max, ell_target: a.ell_target, seeds, seed_multipliers: a.seed_multipliers, ..Default::default() };
        let v = constant_verdict(&alpha, &hopts)?;
        body["verdict"] = v["verdict"].clone();
        body["verdict_details"] = v["details"].clone();
        body["alpha"] = json!(alpha.iter().map(RealInterval::to_json).collect::<Vec<_>>());
        if a.components {
            let comps = match &a.alpha {
                Some(t) => t
                    .iter()
                    .map(|tok| {
                        let (iv, s) = alpha_tokens(std::slice::from_ref(tok), a.digits, a.seed_kmax)?;
                        let o = HomogeneousOptions { seeds: s, ..hopts.clone() };
                        Ok(json!({"alpha": tok, "result": constant_verdict(&iv, &o)?}))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => alpha
                    .iter()
                    .map(|iv| Ok(json!({"alpha": iv.to_json(), "result": constant_verdict(std::slice::from_ref(iv), &hopts)?})))
                    .collect::<Result<Vec<_>>>()?,
            };
            body["components"] = json!(comps);
        }
    }
    if !a.homogeneous.is_empty() {
        body["homogeneous"] = json!(a.homogeneous.iter().map(homogeneous_case).collect::<Result<Vec<_>>>()?);
    }
    Ok((body, vec![("scatter.csv", scan.scatter_csv())]))
}

/// Random degree-`p` form with Gaussian-integer coefficients in `[−3, 3]` at `support` frequencies.
pub fn random_trig_form<S: Scalar>(n: usize, big_n: usize, p: usize, bx: &FrequencyBox, support: usize, rng: &mut ChaCha8Rng) -> TrigPForm<S> {
    let mut u = TrigPForm::zero(n, big_n, p);
    let (h, x) = (bx.h as i128, bx.x as i128);
    for _ in 0..support {
        let eta: Vec<i128> = (0..n).map(|_| rng.gen_range(-h..=h)).collect();
        let xi: Vec<i128> = (0..big_n).map(|_| rng.gen_range(-x..=x)).collect();
        for k in MultiIndex::all(n, p) {
            let c = S::from_i128(rng.gen_range(-3..=3)) + S::i() * S::from_i128(rng.gen_range(-3..=3));
            u.add_term(Freq::new(eta.clone(), xi.clone()), k, c).expect("dimensions match");
        }
    }
    u
}

fn solve<S: Scalar>(ctx: &Ctx) -> Result<Outcome> {
    let spec = system(ctx)?;
    let s = &ctx.loaded.config.solve;
    let mut manufactured = Value::Null;
    let mut truth = None;
    let f: TrigPForm<S> = if let Some(v) = &s.f {
        TrigPForm::from_json(v)?
    } else if let Some(p) = &s.f_path {
        let path = ctx.loaded.base_dir.join(p);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        TrigPForm::from_json(&v)?
    } else if let Some(m) = &s.manufactured {
        let bx = ctx.loaded.frequency_box()?;
        if m.p >= spec.n {
            return Err(Error::Config(format!("manufactured degree {} needs p < n = {}", m.p, spec.n)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let u = random_trig_form::<S>(spec.n, spec.big_n, m.p, &bx, m.support, &mut rng);
        manufactured = json!({"p": m.p, "support": m.support});
        let f = apply_operator(&spec, &u)?;
        truth = Some(u);
        f
    } else {
        return Err(Error::Config("solve needs f, f_path or manufactured".into()));
    };
    let sol = solve_constant(&spec, &f, &SolveOptions { tol: ctx.tol, ..Default::default() })?;
    let mut body = json!({
        "solve": {
            "residual_inf": sol.residual_inf,
            "growth_fit": sol.growth,
            "degree": f.degree() - 1,
            "frequencies": f.num_frequencies(),
            "sector_frequencies": sol.sector_frequencies,
            "compatible": sol.compatibility.pass,
        }
    });
    if let Some(u) = truth {
        // the 0-form solution is unique; higher degrees differ by a closed form
        body["solve"]["manufactured"] = manufactured;
        body["solve"]["manufactured"]["distance_to_planted"] = json!(sol.u.distance(&u)?);
    }
    Ok((body, vec![("solution.json", pretty(&sol.u.to_json())?)]))
}

/// Frequencies `(−round(q α), q)` for convergent denominators `q` of every `α_j`.
fn convergent_candidates(alpha: &[BigRational], depth: usize) -> Result<Vec<Freq>> {
    let limit = BigInt::from(10).pow(36);
    let mut out = Vec::new();
    for a in alpha {
        for c in continued_fraction(&RealInterval::exact(a.clone()), depth)? {
            if c.q > limit {
                break;
            }
            let q = BigRational::from_integer(c.q.clone());
            let eta: Option<Vec<i128>> = alpha.iter().map(|b| (-(b * &q).round()).to_integer().to_i128()).collect();
            if let (Some(eta), Some(qi)) = (eta, c.q.to_i128()) {
                out.push(Freq::new(eta, vec![qi]));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn witness<S: Scalar>(ctx: &Ctx) -> Result<Outcome> {
    let spec = system(ctx)?;
    let w = &ctx.loaded.config.witness;
    let (ws, candidates) = match &w.frequencies {
        Some(fs) => {
            let freqs = fs.iter().map(|f| Ok(Freq::new(int_vec(Some(&f.eta))?, int_vec(Some(&f.xi))?))).collect::<Result<Vec<_>>>()?;
            (WitnessSequence::from_frequencies::<S>(&spec, &freqs, w.delta)?, freqs.len())
        }
        None => {
            let alpha = linear_alpha(&spec)
                .ok_or_else(|| Error::Config("witness candidates need witness.frequencies or exact real linear symbols with N = 1".into()))?;
            let cands = convergent_candidates(&alpha, w.cf_depth)?;
            let ws = WitnessSequence::search::<S>(&spec, &cands, w.delta, w.max_terms)?;
            if ws.terms.len() < w.min_terms {
                return Err(Error::NoWitness(format!(
                    "{} of the required {} terms found among {} convergent candidates",
                    ws.terms.len(),
                    w.min_terms,
                    cands.len()
                )));
            }
            (ws, cands.len())
        }
    };
    let wit = build_witness::<S>(&spec, &ws, w.p, &ctx.tol)?;
    let blow = demonstrate_blowup::<S>(
        &spec,
        &wit,
        &ws,
        &BlowupOptions { train: w.train, lambda_hat: w.lambda_hat, degree: w.degree, seed: ctx.seed, tol: ctx.tol },
    )?;
    let body = json!({
        "witness": {
            "terms": ws.to_json(),
            "forced_coeffs": blow.terms.iter().map(|t| json!({"l": t.l, "log10_forced": t.log10_forced, "local_exponent": t.local_exponent})).collect::<Vec<_>>(),
            "candidates": candidates,
            "construction": wit.to_json(),
            "blowup": serde_json::to_value(&blow)?,
            "empirical": true,
        }
    });
    Ok((body, vec![("witness_f.json", pretty(&wit.f.to_json())?)]))
}

fn reduce(ctx: &Ctx) -> Result<Outcome> {
    let bx = ctx.loaded.frequency_box()?;
    let spec = system(ctx)?;
    let sys = ctx.loaded.system_value()?;
    let r = &ctx.loaded.config.reduce;
    let xis = bx.xis(spec.big_n);
    let zero = ctx.tol.zero();
    let closed_arith = match ctx.arith {
        Arith::Exact => match CoefficientProfile::<GaussianRational>::from_system_json(sys) {
            Ok(pq) => match check_closedness(&pq, &spec, &xis, &zero) {
                Ok(()) => "exact",
                Err(Error::NotExact(_)) => "float",
                Err(e) => return Err(e),
            },
            Err(_) => "float",
        },
        Arith::Float => "float",
    };
    let prof = CoefficientProfile::<C64>::from_system_json(sys)?;
    if closed_arith == "float" {
        check_closedness(&prof, &spec, &xis, &zero)?;
    }
    let nf = decompose(&prof, &spec, &xis, &zero)?;
    let cd = check_condition_d(&nf, &ConditionDOptions { kappa_max: r.kappa_max, ..Default::default() });
    let degrees: Vec<usize> = r.degrees.iter().copied().filter(|&p| p < spec.n).collect();
    let conj = if r.conjugation {
        let o = ConjugationOptions {
            degrees,
            trials_per_degree: r.trials_per_degree,
            support: r.support,
            cap: None,
            seed: ctx.seed,
            broken_trials: r.broken_trials,
        };
        serde_json::to_value(verify_conjugation(&prof, &spec, &bx, &o)?)?
    } else {
        Value::Null
    };
    let classifier = match prof.decoupled() {
        Some(_) => classify_decoupled(&prof, &spec, &r.classify_box.into(), r.margin)?.to_json(),
        None => Value::Null,
    };
    let smoke = if r.conjugation && r.smoke_degree < spec.n {
        serde_json::to_value(reduction_smoke(&prof, &spec, &bx, r.smoke_degree, r.support, ctx.seed)?)?
    } else {
        Value::Null
    };
    let c = |z: &C64| json!({"re": z.re, "im": z.im});
    let normal_form = json!({
        "n": nf.n,
        "N": nf.big_n,
        "decoupled": nf.decoupled.is_some(),
        "profile_constant": prof.is_constant(),
        "means": prof.means().iter().map(c).collect::<Vec<_>>(),
        "slices": nf.slices.iter().map(|s| json!({
            "xi": s.xi.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "c0": s.c0.iter().map(c).collect::<Vec<_>>(),
            "cal_bandwidth": s.cal.bandwidth(),
            "cal": s.cal.to_json()["terms"],
        })).collect::<Vec<_>>(),
    });
    let body = json!({
        "reduce": {
            "closedness": {"pass": true, "arithmetic": closed_arith},
            "normal_form": {"slices": nf.slices.len(), "max_cal_bandwidth": nf.slices.iter().map(|s| s.cal.bandwidth()).max().unwrap_or(0)},
            "condition_d": cd.to_json(),
            "conjugation": conj,
            "classifier": classifier,
            "classify_box": {"H": r.classify_box.h, "X": r.classify_box.x},
            "reduction": smoke,
            "empirical": true,
        }
    });
    Ok((body, vec![("normal_form.json", pretty(&normal_form)?)]))
}
