//! The `hgm` command line: argument grammar, per-prime orchestration,
//! JSON/CSV output and the result cache.

pub mod cache;

use anyhow::{anyhow, bail, Context, Result};
use cache::{cached, Cache};
use clap::{Parser, Subcommand, ValueEnum};
use hgm::congruence::{eisenstein_check, params_congruent, verify_congruence};
use hgm::elimination::{eliminate, ingest_form, synth_form_from_curve, DiophantineInstance};
use hgm::elliptic::{legendre_conductor2_branch, tate_conductor_exponent, verify_rational_hgm, EllipticCurveQ, Family};
use hgm::euler_curve::verify_trace_frob;
use hgm::finite_char::build_ctx;
use hgm::hgm_core::{
    classify_prime, finite_hyp_trace, monodromy, normalize, parse_rat, symmetry_group, weil_bound_holds, HgmParameter, PrimeClass, Point,
};
use hgm::hyperelliptic::{verify_appendix, verify_appendix_even};
use hgm::ntheory::is_prime;
use hgm::transforms::{s3_row, s3_transform, S3Case};
use hgm::Rat;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "hgm", version, about = "Exact traces and verifications for rank-2 hypergeometric motives")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    /// Output format; csv flattens the per-prime rows.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads for per-prime work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Keep the list of skipped primes and the reasons in the output.
    #[arg(long, global = true)]
    pub explain_skips: bool,
    /// Directory of the result cache.
    #[arg(long, global = true, env = "HGM_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// H_q (and the normalized T_q) at each admissible prime.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
    },
    /// Local monodromy matrices at 0, 1, ∞ with their orders.
    Monodromy {
        #[arg(long, allow_hyphen_values = true)]
        params: String,
    },
    /// Symmetry group H and the field of definition.
    Field {
        #[arg(long, allow_hyphen_values = true)]
        params: String,
    },
    /// One case of the S3 action on {0, 1, ∞}.
    S3 {
        #[arg(long = "case")]
        case: S3Case,
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
    },
    /// Trace congruence modulo a prime above p.
    Congruence {
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        /// Omit together with --eisenstein to compare with 1 + q.
        #[arg(long, allow_hyphen_values = true)]
        right: Option<String>,
        #[arg(long)]
        eisenstein: bool,
        #[arg(long = "mod")]
        modulus: u64,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
    },
    /// H_q against a_q of the family's elliptic curve.
    VerifyRational {
        #[arg(long)]
        family: Family,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
    },
    /// Conductor exponent at 2 of the Legendre curve: case table and Tate.
    Conductor2 {
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
    },
    /// Elimination of a form for A x^p + B y^r = C z^q.
    Eliminate {
        /// A,B,C,p,q
        #[arg(long)]
        instance: String,
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        /// Form coefficient file.
        #[arg(long, conflicts_with = "curve")]
        form: Option<PathBuf>,
        /// Build the form from a_ℓ of the curve [a1,a2,a3,a4,a6].
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        ells: String,
        #[arg(long, default_value_t = 5)]
        floor: u64,
    },
    /// Hyperelliptic comparison for (1/N, −1/N),(1,1).
    Hyperell {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
        /// Use the even-N quotient curve with a = 2 − 4t.
        #[arg(long)]
        even: bool,
    },
    /// Euler-curve eigenspace sums against H_q.
    VerifyEuler {
        #[arg(long, allow_hyphen_values = true)]
        params: String,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        primes: String,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Outcome {
    value: Value,
    mismatch: bool,
}

/// "lo..hi" (inclusive) or a comma-separated list; sorted, deduplicated.
pub fn parse_primes(s: &str) -> Result<Vec<u64>> {
    let mut v: Vec<u64> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad range start {:?}", lo))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad range end {:?}", hi))?;
        if lo > hi {
            bail!("empty prime range {}", s);
        }
        (lo..=hi).filter(|&n| is_prime(n)).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad prime {:?}", x)))
            .collect::<Result<_>>()?
    };
    if let Some(bad) = v.iter().find(|&&n| !is_prime(n)) {
        bail!("{} is not prime", bad);
    }
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        bail!("no primes in {:?}", s);
    }
    Ok(v)
}

fn parse_params(s: &str) -> Result<HgmParameter> {
    HgmParameter::parse(s).map_err(|e| anyhow!("--params {:?}: {} (expected \"a,b;c,d\")", s, e))
}

fn parse_t(s: &str) -> Result<Rat> {
    let t = parse_rat(s).map_err(|_| anyhow!("--t {:?}: expected an integer or n/d", s))?;
    if t.is_zero() || t.is_one() {
        bail!("--t must avoid 0 and 1");
    }
    Ok(t)
}

enum PerPrime {
    Row(Value),
    Skip(String),
}

impl PerPrime {
    fn to_value(&self) -> Value {
        match self {
            PerPrime::Row(v) => json!({ "row": v }),
            PerPrime::Skip(s) => json!({ "skip": s }),
        }
    }

    fn from_value(v: Value) -> Result<Self> {
        if let Some(r) = v.get("row") {
            Ok(PerPrime::Row(r.clone()))
        } else if let Some(s) = v.get("skip").and_then(|s| s.as_str()) {
            Ok(PerPrime::Skip(s.to_string()))
        } else {
            bail!("malformed cached value")
        }
    }
}

struct Ctx {
    jobs: Option<usize>,
    cache: Option<Cache>,
}

impl Ctx {
    /// Evaluate `f` at every prime (in parallel, order preserved, cached
    /// under `tag`) and collect {rows, skipped}.
    fn per_prime<F>(&self, tag: &[&str], primes: &[u64], f: F) -> Result<(Vec<Value>, Vec<Value>)>
    where
        F: Fn(u64) -> Result<PerPrime> + Sync + Send,
    {
        let work = |q: u64| -> Result<PerPrime> {
            let qs = q.to_string();
            let mut parts: Vec<&str> = tag.to_vec();
            parts.push(&qs);
            let v = cached(self.cache.as_ref(), &parts, || f(q).map(|r| r.to_value()))?;
            PerPrime::from_value(v)
        };
        let results: Vec<Result<PerPrime>> = match self.jobs {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("thread pool")?
                .install(|| primes.par_iter().map(|&q| work(q)).collect()),
            None => primes.par_iter().map(|&q| work(q)).collect(),
        };
        let mut rows = vec![];
        let mut skipped = vec![];
        for (q, r) in primes.iter().zip(results) {
            match r? {
                PerPrime::Row(v) => rows.push(v),
                PerPrime::Skip(why) => skipped.push(json!({ "q": q, "reason": why })),
            }
        }
        Ok((rows, skipped))
    }
}

fn require_rows(rows: &[Value]) -> Result<()> {
    if rows.is_empty() {
        bail!("no admissible primes in the given range (rerun with --explain-skips)");
    }
    Ok(())
}

fn admissible(p: &HgmParameter, t0: &Rat, q: u64) -> Result<Option<String>> {
    if q < 3 || (q - 1) % p.n != 0 {
        return Ok(Some("not split".into()));
    }
    let c = classify_prime(p, t0, q)?;
    Ok((c != PrimeClass::Good).then(|| format!("bad prime: {}", c)))
}

fn all_true(rows: &[Value], key: &str) -> bool {
    rows.iter().all(|r| r.get(key).and_then(|v| v.as_bool()).unwrap_or(false))
}

fn dispatch(cmd: &Cmd, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        Cmd::Trace { params, t, primes } => {
            let p = parse_params(params)?;
            let t0 = parse_t(t)?;
            let primes = parse_primes(primes)?;
            let ps = p.to_string();
            let ts = t0.to_string();
            let (rows, skipped) = ctx.per_prime(&["trace", &ps, &ts], &primes, |q| {
                if let Some(why) = admissible(&p, &t0, q)? {
                    return Ok(PerPrime::Skip(why));
                }
                let c = build_ctx(q, &[p.n])?;
                let h = finite_hyp_trace(&p, &t0, &c)?;
                let tq = normalize(&p, &h, q).ok();
                Ok(PerPrime::Row(json!({
                    "q": q,
                    "H": h,
                    "T": tq,
                    "weil_ok": weil_bound_holds(&h, q, 1e-6),
                })))
            })?;
            require_rows(&rows)?;
            Ok(Outcome { value: json!({ "params": p.to_json(), "t0": ts, "rows": rows, "skipped": skipped }), mismatch: false })
        }
        Cmd::Monodromy { params } => {
            let p = parse_params(params)?;
            let m = |pt| monodromy(&p, pt).map(|m| m.to_json());
            Ok(Outcome {
                value: json!({
                    "params": p.to_json(),
                    "zero": m(Point::Zero)?,
                    "one": m(Point::One)?,
                    "infinity": m(Point::Infinity)?,
                }),
                mismatch: false,
            })
        }
        Cmd::Field { params } => {
            let p = parse_params(params)?;
            Ok(Outcome { value: serde_json::to_value(symmetry_group(&p)?)?, mismatch: false })
        }
        Cmd::S3 { case, params, t, primes } => {
            let p = parse_params(params)?;
            let t0 = parse_t(t)?;
            if *case == S3Case::C13 && t0 == -Rat::one() {
                bail!("--t = -1 is fixed by t ↦ 1/t; choose another point");
            }
            let primes = parse_primes(primes)?;
            let tm = s3_transform(&p, *case)?;
            let (ps, ts, cs) = (p.to_string(), t0.to_string(), format!("{:?}", case));
            let (rows, skipped) = ctx.per_prime(&["s3", &cs, &ps, &ts], &primes, |q| {
                Ok(match s3_row(&p, *case, &tm, &t0, q)? {
                    Ok(r) => PerPrime::Row(serde_json::to_value(r)?),
                    Err(why) => PerPrime::Skip(why),
                })
            })?;
            require_rows(&rows)?;
            let ok = all_true(&rows, "equal");
            Ok(Outcome {
                value: json!({ "case": case, "params": p.to_json(), "t0": ts, "all_equal": ok, "rows": rows, "skipped": skipped }),
                mismatch: !ok,
            })
        }
        Cmd::Congruence { left, right, eisenstein, modulus, t, primes } => {
            let l = parse_params(left)?;
            let t0 = parse_t(t)?;
            let primes = parse_primes(primes)?;
            let p = *modulus;
            if !is_prime(p) {
                bail!("--mod {} is not prime", p);
            }
            let ls = l.to_string();
            let ts = t0.to_string();
            let (header, rows, skipped) = match (right, eisenstein) {
                (Some(r), false) => {
                    let r = parse_params(r)?;
                    let claim = params_congruent(&l, &r, p).ok_or_else(|| anyhow!("{} and {} are not ~_{}-related", l, r, p))?;
                    let rs = r.to_string();
                    let ps = p.to_string();
                    let (rows, skipped) = ctx.per_prime(&["congruence", &ls, &rs, &ps, &ts], &primes, |q| {
                        let rep = verify_congruence(&claim, &t0, &[q])?;
                        Ok(match rep.rows.into_iter().next() {
                            Some(row) => PerPrime::Row(serde_json::to_value(row)?),
                            None => PerPrime::Skip(rep.skipped.first().map(|s| s.1.clone()).unwrap_or_default()),
                        })
                    })?;
                    (json!({ "left": l.to_json(), "right": r.to_json(), "p": p, "pairing": claim.pairing }), rows, skipped)
                }
                (None, true) => {
                    let ps = p.to_string();
                    let (rows, skipped) = ctx.per_prime(&["eisenstein", &ls, &ps, &ts], &primes, |q| {
                        let rep = eisenstein_check(&l, p, &t0, &[q])?;
                        Ok(match rep.rows.into_iter().next() {
                            Some(row) => PerPrime::Row(serde_json::to_value(row)?),
                            None => PerPrime::Skip(rep.skipped.first().map(|s| s.1.clone()).unwrap_or_default()),
                        })
                    })?;
                    (json!({ "left": l.to_json(), "right": "1+q", "p": p }), rows, skipped)
                }
                _ => bail!("give exactly one of --right or --eisenstein"),
            };
            require_rows(&rows)?;
            let ok = all_true(&rows, "equal");
            let mut v = header;
            v["t0"] = json!(ts);
            v["all_equal"] = json!(ok);
            v["rows"] = json!(rows);
            v["skipped"] = json!(skipped);
            Ok(Outcome { value: v, mismatch: !ok })
        }
        Cmd::VerifyRational { family, t, primes } => {
            let t0 = parse_t(t)?;
            let primes = parse_primes(primes)?;
            let key = format!("{:?}", primes);
            let (fs, ts) = (family.to_string(), t0.to_string());
            let v = cached(ctx.cache.as_ref(), &["verify-rational", &fs, &ts, &key], || -> Result<Value> {
                Ok(serde_json::to_value(verify_rational_hgm(*family, &t0, &primes)?)?)
            })?;
            let ok = v["all_equal"].as_bool().unwrap_or(false);
            Ok(Outcome { value: v, mismatch: !ok })
        }
        Cmd::Conductor2 { t } => {
            let t0 = parse_t(t)?;
            let (f, branch) = legendre_conductor2_branch(&t0)?;
            let e = Family::Legendre.model(&t0)?;
            let (tf, kod) = tate_conductor_exponent(&e, 2);
            Ok(Outcome {
                value: json!({
                    "t0": t0.to_string(),
                    "f2": f,
                    "branch": branch,
                    "tate_f2": tf,
                    "kodaira": kod.to_string(),
                    "agree": f == tf,
                }),
                mismatch: f != tf,
            })
        }
        Cmd::Eliminate { instance, params, form, curve, ells, floor } => {
            let p = parse_params(params)?;
            let inst = DiophantineInstance::parse(instance, p)?;
            let ells = parse_primes(ells)?;
            for &l in &ells {
                inst.admissible(l).map_err(|why| anyhow!("ℓ = {} is not admissible: {}", l, why))?;
            }
            let f = match (form, curve) {
                (Some(path), None) => ingest_form(path)?,
                (None, Some(c)) => {
                    let a: Vec<i64> = c
                        .split(',')
                        .map(|x| x.trim().parse::<i64>().with_context(|| format!("bad coefficient {:?}", x)))
                        .collect::<Result<_>>()?;
                    let a: [i64; 5] = a.try_into().map_err(|_| anyhow!("--curve needs a1,a2,a3,a4,a6"))?;
                    synth_form_from_curve(&EllipticCurveQ::from_ints(a)?, inst.level(), &ells)?
                }
                _ => bail!("give exactly one of --form or --curve"),
            };
            for w in &f.warnings {
                eprintln!("warning: {}", w);
            }
            let rep = eliminate(&f, &inst, &ells, *floor)?;
            Ok(Outcome { value: serde_json::to_value(rep)?, mismatch: false })
        }
        Cmd::Hyperell { n, t, primes, even } => {
            let t0 = parse_t(t)?;
            let primes = parse_primes(primes)?;
            let key = format!("{:?}", primes);
            let (ns, ts, es) = (n.to_string(), t0.to_string(), even.to_string());
            let v = cached(ctx.cache.as_ref(), &["hyperell", &ns, &ts, &es, &key], || -> Result<Value> {
                let rep = if *even { verify_appendix_even(*n, &t0, &primes)? } else { verify_appendix(*n, &t0, &primes)? };
                Ok(serde_json::to_value(rep)?)
            })?;
            let ok = v["all_equal"].as_bool().unwrap_or(false);
            Ok(Outcome { value: v, mismatch: !ok })
        }
        Cmd::VerifyEuler { params, t, primes } => {
            let p = parse_params(params)?;
            let t0 = parse_t(t)?;
            let primes = parse_primes(primes)?;
            let (ps, ts) = (p.to_string(), t0.to_string());
            let (rows, skipped) = ctx.per_prime(&["verify-euler", &ps, &ts], &primes, |q| {
                if let Some(why) = admissible(&p, &t0, q)? {
                    return Ok(PerPrime::Skip(why));
                }
                let c = build_ctx(q, &[p.n])?;
                let r = verify_trace_frob(&p, &t0, &c)?;
                Ok(PerPrime::Row(json!({
                    "q": r.q,
                    "lhs": r.lhs,
                    "rhs": r.rhs,
                    "equal": r.equal,
                    "conjugate_equal": r.conjugate_equal,
                })))
            })?;
            require_rows(&rows)?;
            let ok = all_true(&rows, "equal");
            Ok(Outcome {
                value: json!({ "params": p.to_json(), "t0": ts, "all_equal": ok, "rows": rows, "skipped": skipped }),
                mismatch: !ok,
            })
        }
    }
}

fn strip_skips(v: &mut Value) {
    if let Some(o) = v.as_object_mut() {
        o.remove("skipped");
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Flat projection: one record per element of "rows", or the top-level object.
pub fn to_csv(v: &Value) -> Result<String> {
    let records: Vec<Map<String, Value>> = match v.get("rows").and_then(|r| r.as_array()) {
        Some(rows) => rows.iter().filter_map(|r| r.as_object().cloned()).collect(),
        None => v.as_object().cloned().into_iter().collect(),
    };
    let mut w = csv::Writer::from_writer(vec![]);
    if let Some(first) = records.first() {
        let header: Vec<&String> = first.keys().collect();
        w.write_record(&header)?;
        for r in &records {
            w.write_record(header.iter().map(|k| cell(r.get(*k).unwrap_or(&Value::Null))))?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let ctx = Ctx { jobs: cli.jobs, cache: cli.cache_dir.clone().map(Cache::new) };
    let outcome = match dispatch(&cli.cmd, &ctx) {
        Ok(o) => o,
        Err(e) => return Output { code: 1, stdout: String::new(), stderr: format!("error: {:#}\n", e) },
    };
    let mut value = outcome.value;
    if !cli.explain_skips {
        strip_skips(&mut value);
    }
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&value).expect("serializable") + "\n",
        Format::Csv => match to_csv(&value) {
            Ok(s) => s,
            Err(e) => return Output { code: 1, stdout: String::new(), stderr: format!("error: {:#}\n", e) },
        },
    };
    let code = if outcome.mismatch { 2 } else { 0 };
    let mut stderr = String::new();
    if outcome.mismatch {
        stderr.push_str("verification mismatch\n");
    }
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return Output { code: 1, stdout: String::new(), stderr: format!("error: {}: {}\n", path.display(), e) };
            }
            Output { code, stdout: String::new(), stderr }
        }
        None => Output { code, stdout: text, stderr },
    }
}
