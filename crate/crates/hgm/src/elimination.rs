//! Mazur-style elimination of forms for A x^p + B y^r = C z^q with varying r.
//!
//! Traces are compared in the normalization T = q^{1−k/2} H. A difference δ
//! constrains r through r | Norm(δ); norms are taken over Q(ζ_N).

use crate::cyclotomic::Cyclotomic;
use crate::elliptic::EllipticCurveQ;
use crate::finite_char::{build_ctx, PrimeFieldCtx};
use crate::hgm_core::{
    degenerate_infinity_residue, degenerate_zero_residue, hyp_trace_residue, monodromy, normalize, normalize_degenerate,
    normalized_trace, weil_bound_holds, HgmError, HgmParameter, Order, Point,
};
use crate::ntheory::{factor_big, gcd, is_prime, pow_mod, prime_divisors};
use crate::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElimError {
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("prime ℓ = {0} is not admissible: {1}")]
    Inadmissible(u64, String),
    #[error("form schema: {0}")]
    Schema(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Hgm(#[from] HgmError),
}

impl From<crate::finite_char::CharError> for ElimError {
    fn from(e: crate::finite_char::CharError) -> Self {
        ElimError::Hgm(e.into())
    }
}

/// A x^p + B y^r = C z^q together with the Frey motive parameter; the
/// motive is specialized at t0 = A α^p / (C γ^q).
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineInstance {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub p: u64,
    pub q: u64,
    pub param: HgmParameter,
}

impl DiophantineInstance {
    pub fn new(a: i64, b: i64, c: i64, p: u64, q: u64, param: HgmParameter) -> Result<Self, ElimError> {
        if a == 0 || b == 0 || c == 0 {
            return Err(ElimError::Instance("A, B, C must be nonzero".into()));
        }
        let g = |x: i64, y: i64| gcd(x.unsigned_abs(), y.unsigned_abs());
        if g(a, b) != 1 || g(a, c) != 1 || g(b, c) != 1 {
            return Err(ElimError::Instance("A, B, C must be pairwise coprime".into()));
        }
        for e in [p, q] {
            if e < 3 || !is_prime(e) {
                return Err(ElimError::Instance(format!("{} is not an odd prime", e)));
            }
        }
        if !param.generic {
            return Err(ElimError::Hgm(HgmError::NonGeneric));
        }
        Ok(DiophantineInstance { a, b, c, p, q, param })
    }

    /// Parse "A,B,C,p,q".
    pub fn parse(s: &str, param: HgmParameter) -> Result<Self, ElimError> {
        let v: Vec<i64> = s
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| ElimError::Instance(format!("bad integer {:?}", x))))
            .collect::<Result<_, _>>()?;
        if v.len() != 5 || v[3] <= 0 || v[4] <= 0 {
            return Err(ElimError::Instance("expected A,B,C,p,q".into()));
        }
        Self::new(v[0], v[1], v[2], v[3] as u64, v[4] as u64, param)
    }

    pub fn level(&self) -> u64 {
        self.param.n
    }

    /// The motive's specialization point at a solution (α, γ).
    pub fn t0(&self, alpha: i64, gamma: i64) -> Rat {
        let num = BigInt::from(self.a) * BigInt::from(alpha).pow(self.p as u32);
        let den = BigInt::from(self.c) * BigInt::from(gamma).pow(self.q as u32);
        Rat::new(num, den)
    }

    pub fn admissible(&self, ell: u64) -> Result<(), String> {
        if ell < 3 || !is_prime(ell) {
            return Err("not an odd prime".into());
        }
        let abc = (self.a * self.b * self.c).unsigned_abs() as u128 * self.p as u128 * self.q as u128;
        if abc % ell as u128 == 0 {
            return Err("divides ABCpq".into());
        }
        if (ell - 1) % self.level() != 0 {
            return Err(format!("not ≡ 1 mod {}", self.level()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionCase {
    /// α̃β̃γ̃ ≠ 0.
    Case1,
    /// α̃ = 0, β̃ ≠ 0.
    Case2Alpha,
    /// γ̃ = 0, β̃ ≠ 0.
    Case2Gamma,
    /// β̃ = 0.
    Case3,
}

/// S_ℓ parametrized by (α̃, γ̃) ≠ (0, 0), split into the three cases.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionsModEll {
    pub ell: u64,
    pub members: BTreeMap<SolutionCase, Vec<(u64, u64)>>,
}

impl SolutionsModEll {
    pub fn total(&self) -> usize {
        self.members.values().map(|v| v.len()).sum()
    }

    pub fn count(&self, c: SolutionCase) -> usize {
        self.members.get(&c).map_or(0, |v| v.len())
    }
}

fn m(x: i64, l: u64) -> u64 {
    x.rem_euclid(l as i64) as u64
}

pub fn solutions_mod_ell(inst: &DiophantineInstance, ell: u64) -> Result<SolutionsModEll, ElimError> {
    inst.admissible(ell).map_err(|why| ElimError::Inadmissible(ell, why))?;
    let (a, c) = (m(inst.a, ell), m(inst.c, ell));
    let mut members: BTreeMap<SolutionCase, Vec<(u64, u64)>> = BTreeMap::new();
    for al in 0..ell {
        for ga in 0..ell {
            if al == 0 && ga == 0 {
                continue;
            }
            let lhs = a * pow_mod(al, inst.p, ell) % ell;
            let rhs = c * pow_mod(ga, inst.q, ell) % ell;
            // B β̃^r = C γ̃^q − A α̃^p, so β̃ = 0 iff the two sides agree
            let case = if lhs == rhs {
                SolutionCase::Case3
            } else if al == 0 {
                SolutionCase::Case2Alpha
            } else if ga == 0 {
                SolutionCase::Case2Gamma
            } else {
                SolutionCase::Case1
            };
            members.entry(case).or_default().push((al, ga));
        }
    }
    Ok(SolutionsModEll { ell, members })
}

/// #{(α̃,β̃,γ̃) ≠ 0 : Aα̃^p + Bβ̃^r = Cγ̃^q} by direct enumeration.
pub fn count_s_ell_bruteforce(inst: &DiophantineInstance, ell: u64, r: u64) -> u64 {
    let (a, b, c) = (m(inst.a, ell), m(inst.b, ell), m(inst.c, ell));
    let mut n = 0;
    for x in 0..ell {
        for y in 0..ell {
            for z in 0..ell {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                let l = (a * pow_mod(x, inst.p, ell) + b * pow_mod(y, r, ell)) % ell;
                if l == c * pow_mod(z, inst.q, ell) % ell {
                    n += 1;
                }
            }
        }
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    File,
    FromCurve,
    FromMotive,
}

/// Coefficients a_ℓ of a form as elements of Z[ζ_N].
#[derive(Debug, Clone, PartialEq)]
pub struct FormCoefficients {
    pub level: u64,
    pub entries: BTreeMap<u64, Cyclotomic<BigRational>>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormFile {
    level: u64,
    coefficients: Vec<FormEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormEntry {
    ell: u64,
    a: Cyclotomic<BigRational>,
}

impl FormCoefficients {
    fn with_checks(level: u64, entries: BTreeMap<u64, Cyclotomic<BigRational>>, provenance: Provenance) -> Result<Self, ElimError> {
        let mut warnings = vec![];
        for (ell, a) in &entries {
            if a.level() != level {
                return Err(ElimError::Schema(format!("a_{} has level {} instead of {}", ell, a.level(), level)));
            }
            if !a.coeffs().iter().all(|c| c.is_integer()) {
                return Err(ElimError::Schema(format!("a_{} has a non-integral coefficient", ell)));
            }
            if !weil_bound_holds(a, *ell, 1e-6) {
                warnings.push(format!("a_{} violates the Weil bound", ell));
            }
        }
        Ok(FormCoefficients { level, entries, provenance, warnings })
    }

    pub fn to_json(&self) -> String {
        let f = FormFile {
            level: self.level,
            coefficients: self.entries.iter().map(|(l, a)| FormEntry { ell: *l, a: a.clone() }).collect(),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ElimError> {
        let f: FormFile = serde_json::from_str(s).map_err(|e| ElimError::Schema(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
        let mut entries = BTreeMap::new();
        for e in f.coefficients {
            if entries.insert(e.ell, e.a).is_some() {
                return Err(ElimError::Schema(format!("duplicate entry for ℓ = {}", e.ell)));
            }
        }
        Self::with_checks(f.level, entries, Provenance::File)
    }
}

pub fn ingest_form(path: &std::path::Path) -> Result<FormCoefficients, ElimError> {
    let s = std::fs::read_to_string(path).map_err(|e| ElimError::Io(format!("{}: {}", path.display(), e)))?;
    FormCoefficients::from_json(&s)
}

pub fn write_form(form: &FormCoefficients, path: &std::path::Path) -> Result<(), ElimError> {
    std::fs::write(path, form.to_json() + "\n").map_err(|e| ElimError::Io(format!("{}: {}", path.display(), e)))
}

/// Rational form with a_ℓ(E) at each listed prime of good reduction.
pub fn synth_form_from_curve(e: &EllipticCurveQ, level: u64, primes: &[u64]) -> Result<FormCoefficients, ElimError> {
    let mut entries = BTreeMap::new();
    for &l in primes {
        let ap = e.ap(l).map_err(|err| ElimError::Schema(format!("ℓ = {}: {}", l, err)))?;
        entries.insert(l, Cyclotomic::<BigRational>::from_int(level, ap));
    }
    FormCoefficients::with_checks(level, entries, Provenance::FromCurve)
}

/// Form whose a_ℓ are the normalized traces of the instance's motive at t0.
pub fn synth_form_from_motive(inst: &DiophantineInstance, t0: &Rat, primes: &[u64]) -> Result<FormCoefficients, ElimError> {
    let mut entries = BTreeMap::new();
    for &l in primes {
        let ctx = build_ctx(l, &[inst.level()])?;
        let t = normalized_trace(&inst.param, t0, &ctx)?;
        entries.insert(l, t.change_level(inst.level()).map_err(|e| HgmError::Descent(e.to_string()))?);
    }
    FormCoefficients::with_checks(inst.level(), entries, Provenance::FromMotive)
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseCounts {
    pub case1: usize,
    pub case2_alpha: usize,
    pub case2_gamma: usize,
    pub case3: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminationRow {
    pub ell: u64,
    pub counts: CaseCounts,
    /// Distinct nonzero |Norm(δ)|, ascending.
    pub norms: Vec<String>,
    /// Class members whose difference vanishes.
    pub witnesses: Vec<String>,
    pub notices: Vec<String>,
    pub survived: bool,
    /// Product of `norms` (meaningful when not survived).
    pub product: String,
    /// Primes r dividing ℓ − 1, for which r-th powers are not a bijection.
    pub excluded_r: Vec<u64>,
}

/// Integer |Norm(δ)| after clearing powers of ℓ from the denominator.
fn ell_integral_norm(delta: &Cyclotomic<BigRational>, ell: u64) -> BigInt {
    let n = delta.norm();
    let mut den = n.denom().clone();
    let lb = BigInt::from(ell);
    while (&den % &lb).is_zero() {
        den /= &lb;
    }
    assert!(den.is_one(), "norm denominator must be a power of ℓ");
    n.numer().abs()
}

fn predicted_generic(inst: &DiophantineInstance, t: u64, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, ElimError> {
    let h = hyp_trace_residue(&inst.param, t, ctx);
    let h = h.change_level(inst.level()).map_err(|e| HgmError::Descent(e.to_string()))?;
    Ok(normalize(&inst.param, &h, ctx.q())?)
}

/// Whether inertia is trivial at every valuation multiple of e at the point.
fn unramified_multiples(p: &HgmParameter, point: Point, e: u64) -> Result<bool, ElimError> {
    Ok(monodromy(p, point)?.power(e).order() == Order::Finite(1))
}

pub fn eliminate_at_ell(form: &FormCoefficients, inst: &DiophantineInstance, ell: u64) -> Result<EliminationRow, ElimError> {
    let sols = solutions_mod_ell(inst, ell)?;
    let n = inst.level();
    let excluded_r = prime_divisors(ell - 1);
    let counts = CaseCounts {
        case1: sols.count(SolutionCase::Case1),
        case2_alpha: sols.count(SolutionCase::Case2Alpha),
        case2_gamma: sols.count(SolutionCase::Case2Gamma),
        case3: sols.count(SolutionCase::Case3),
    };
    let mut notices = vec![];
    let a_ell = match form.entries.get(&ell) {
        Some(a) => a.change_level(n).map_err(|e| ElimError::Schema(format!("a_{}: {}", ell, e)))?,
        None => {
            notices.push(format!("no coefficient for ℓ = {}; skipped", ell));
            return Ok(EliminationRow {
                ell,
                counts,
                norms: vec![],
                witnesses: vec![],
                notices,
                survived: true,
                product: "0".into(),
                excluded_r,
            });
        }
    };
    let ctx = build_ctx(ell, &[n])?;
    let (a, c) = (m(inst.a, ell), m(inst.c, ell));
    let inv = |x: u64| pow_mod(x, ell - 2, ell);
    let mut norms: BTreeSet<BigInt> = BTreeSet::new();
    let mut witnesses = vec![];

    // case 1: t0 = Aα̃^p / (Cγ̃^q) mod ℓ
    let t_values: BTreeSet<u64> = sols.members.get(&SolutionCase::Case1).into_iter().flatten()
        .map(|&(al, ga)| a * pow_mod(al, inst.p, ell) % ell * inv(c * pow_mod(ga, inst.q, ell) % ell) % ell)
        .collect();
    for t in t_values {
        let d = &a_ell - &predicted_generic(inst, t, &ctx)?;
        record(&d, ell, format!("case1 t={}", t), &mut norms, &mut witnesses);
    }

    // case 2: t0 = ℓ^{±e} t̃ with t̃ ranging over the reachable unit residues
    let units: Vec<u64> = (1..ell).collect();
    let powers = |e: u64| -> BTreeSet<u64> { units.iter().map(|&u| pow_mod(u, e, ell)).collect() };
    for (case, point, e) in [(SolutionCase::Case2Alpha, Point::Zero, inst.p), (SolutionCase::Case2Gamma, Point::Infinity, inst.q)] {
        if sols.count(case) == 0 {
            continue;
        }
        if !unramified_multiples(&inst.param, point, e)? {
            notices.push(format!("{:?}: inertia is ramified at the degenerate point; no constraint", case));
            continue;
        }
        let (pp, qq) = (powers(inst.p), powers(inst.q));
        let mut tt: BTreeSet<u64> = BTreeSet::new();
        for x in &pp {
            for y in &qq {
                tt.insert(a * x % ell * inv(c * y % ell) % ell);
            }
        }
        for t in tt {
            let raw = if point == Point::Zero {
                degenerate_zero_residue(&inst.param, t, &ctx)?
            } else {
                degenerate_infinity_residue(&inst.param, t, &ctx)?
            };
            let pred = normalize_degenerate(&inst.param, &raw, &ctx)?.change_level(n).map_err(|e| HgmError::Descent(e.to_string()))?;
            let d = &a_ell - &pred;
            let tag = if point == Point::Zero { "case2_alpha" } else { "case2_gamma" };
            record(&d, ell, format!("{} t~={}", tag, t), &mut norms, &mut witnesses);
        }
    }

    // case 3: a_ℓ ≡ ±(ℓ + 1)
    if counts.case3 > 0 {
        for (sign, tag) in [(1i64, "+"), (-1, "-")] {
            let target = Cyclotomic::<BigRational>::from_int(n, sign * (ell as i64 + 1));
            let d = &a_ell - &target;
            record(&d, ell, format!("case3 {}(ℓ+1)", tag), &mut norms, &mut witnesses);
        }
    }

    let survived = !witnesses.is_empty();
    let product = norms.iter().fold(BigInt::one(), |acc, x| acc * x);
    Ok(EliminationRow {
        ell,
        counts,
        norms: norms.iter().map(|x| x.to_string()).collect(),
        witnesses,
        notices,
        survived,
        product: if survived { "0".into() } else { product.to_string() },
        excluded_r,
    })
}

fn record(d: &Cyclotomic<BigRational>, ell: u64, tag: String, norms: &mut BTreeSet<BigInt>, witnesses: &mut Vec<String>) {
    if d.is_zero() {
        witnesses.push(tag);
    } else {
        norms.insert(ell_integral_norm(d, ell));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    /// Every ℓ produced a survival witness.
    pub survives: bool,
    /// gcd over non-survived ℓ of the per-ℓ norm products.
    pub gcd: String,
    /// Prime divisors of `gcd`: the r not ruled out.
    pub candidate_r: Vec<String>,
    /// Largest candidate r, or the floor when none exceed it.
    pub bound: Option<String>,
    pub floor: u64,
    /// No candidate r exceeds the floor.
    pub eliminated_above_floor: bool,
    /// Primes r dividing some ℓ − 1 used in the bound.
    pub excluded_r: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminationReport {
    pub instance: String,
    pub params: String,
    pub level: u64,
    pub rows: Vec<EliminationRow>,
    pub aggregate: Aggregate,
}

impl EliminationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn combine(rows: &[EliminationRow], floor: u64) -> Aggregate {
    let live: Vec<&EliminationRow> = rows.iter().filter(|r| !r.survived).collect();
    if live.is_empty() {
        return Aggregate {
            survives: true,
            gcd: "0".into(),
            candidate_r: vec![],
            bound: None,
            floor,
            eliminated_above_floor: false,
            excluded_r: vec![],
        };
    }
    let g = live.iter().fold(BigInt::zero(), |acc, r| acc.gcd(&r.product.parse::<BigInt>().expect("integer")));
    let primes: Vec<BigInt> = if g.is_zero() { vec![] } else { factor_big(&g).into_iter().map(|(p, _)| p).collect() };
    let fb = BigInt::from(floor);
    let eliminated = !g.is_zero() && primes.iter().all(|p| *p <= fb);
    let bound = if g.is_zero() { None } else { Some(primes.iter().max().cloned().unwrap_or_else(|| fb.clone()).max(fb).to_string()) };
    let excluded: BTreeSet<u64> = live.iter().flat_map(|r| r.excluded_r.iter().copied()).collect();
    Aggregate {
        survives: false,
        gcd: g.to_string(),
        candidate_r: primes.iter().map(|p| p.to_string()).collect(),
        bound,
        floor,
        eliminated_above_floor: eliminated,
        excluded_r: excluded.into_iter().collect(),
    }
}

/// Run the engine over the given ℓ (in parallel) and combine.
pub fn eliminate(form: &FormCoefficients, inst: &DiophantineInstance, ells: &[u64], floor: u64) -> Result<EliminationReport, ElimError> {
    let mut ells: Vec<u64> = ells.to_vec();
    ells.sort_unstable();
    ells.dedup();
    let rows: Vec<EliminationRow> = ells
        .par_iter()
        .map(|&l| eliminate_at_ell(form, inst, l))
        .collect::<Result<_, _>>()?;
    let aggregate = combine(&rows, floor);
    Ok(EliminationReport {
        instance: format!("{},{},{},{},{}", inst.a, inst.b, inst.c, inst.p, inst.q),
        params: inst.param.to_string(),
        level: inst.level(),
        rows,
        aggregate,
    })
}

/// Admissible ℓ in [lo, hi].
pub fn admissible_ells(inst: &DiophantineInstance, lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&l| inst.admissible(l).is_ok()).collect()
}

/// Small helper for reports: value of a rational coefficient as i64.
pub fn rational_value(a: &Cyclotomic<BigRational>) -> Option<i64> {
    a.as_scalar().filter(|x| x.is_integer()).and_then(|x| x.to_integer().to_i64())
}
