//! The S3 action on {0, 1, ∞} and twisted traces.
//!
//! Identities as verified here (T_p(t) := H_q(p | t), sgn(x) := ω(−1)^{N·x}):
//! - (13): T_p(1/t) = T_{(−c,−d),(−a,−b)}(t).
//! - (12): T_p(1−t) = sgn(d−b) J([c,a−c],[c−b,a+b−c]) η_{−d}(t) θ_d(t) q^{k(p)−k(p')} T_{p'}(t),
//!   p' = (a,b),(a+b−c,d).
//! - (23): T_p(t/(t−1)) = sgn(c) J([b−d,−b],[c−b,b−c−d]) η_a(t) q^{k(p)−k(p')} T_{p'}(t),
//!   p' = (a,c+d−b),(c,d).
//!
//! k(·) counts integral entries. The nominal twist exponents carry the
//! opposite signs and no q-power; `nominal_equal` in the report tracks them.

use crate::cyclotomic::Cyclotomic;
use crate::finite_char::{build_ctx, PrimeFieldCtx};
use crate::hgm_core::{classify_prime, finite_hyp_trace, omega_sign, HgmError, HgmParameter, PrimeClass, RationalModZ};
use crate::ntheory::lcm;
use crate::Rat;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum S3Case {
    #[serde(rename = "12")]
    C12,
    #[serde(rename = "13")]
    C13,
    #[serde(rename = "23")]
    C23,
}

impl std::str::FromStr for S3Case {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim_matches(|c| c == '(' || c == ')') {
            "12" => Ok(S3Case::C12),
            "13" => Ok(S3Case::C13),
            "23" => Ok(S3Case::C23),
            other => Err(format!("unknown S3 case {:?} (expected 12, 13 or 23)", other)),
        }
    }
}

/// sgn(sign_exponent) · J(jac_num, jac_den) · θ_theta · η_eta · q^{q_power} · H(base).
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedMotive {
    pub base: HgmParameter,
    pub theta_exponent: Rational64,
    pub eta_exponent: Rational64,
    pub jac_num: Vec<Rational64>,
    pub jac_den: Vec<Rational64>,
    pub sign_exponent: Rational64,
    pub q_power: i32,
}

impl TwistedMotive {
    pub fn plain(base: HgmParameter) -> Self {
        TwistedMotive {
            base,
            theta_exponent: Rational64::zero(),
            eta_exponent: Rational64::zero(),
            jac_num: vec![],
            jac_den: vec![],
            sign_exponent: Rational64::zero(),
            q_power: 0,
        }
    }

    /// lcm of every denominator involved.
    pub fn level(&self) -> u64 {
        self.jac_num
            .iter()
            .chain(&self.jac_den)
            .chain([&self.theta_exponent, &self.eta_exponent, &self.sign_exponent])
            .fold(self.base.n, |acc, r| lcm(acc, *r.denom() as u64))
    }
}

fn neg(r: RationalModZ) -> RationalModZ {
    r.neg()
}

fn nominal_twists(p: &HgmParameter, g: S3Case) -> (Rational64, Rational64) {
    match g {
        S3Case::C12 => (-p.d.ratio(), p.d.ratio()),
        S3Case::C13 => (Rational64::zero(), Rational64::zero()),
        S3Case::C23 => (Rational64::zero(), -p.a.ratio()),
    }
}

pub fn s3_transform(p: &HgmParameter, g: S3Case) -> Result<TwistedMotive, HgmError> {
    if !p.generic {
        return Err(HgmError::NonGeneric);
    }
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let (ar, br, cr, dr) = (a.ratio(), b.ratio(), c.ratio(), d.ratio());
    let tm = match g {
        S3Case::C13 => TwistedMotive::plain(HgmParameter::from_entries(neg(c), neg(d), neg(a), neg(b))),
        S3Case::C12 => {
            let base = HgmParameter::from_entries(a, b, a.add(b).sub(c), d);
            TwistedMotive {
                q_power: p.integral_count() as i32 - base.integral_count() as i32,
                base,
                theta_exponent: dr,
                eta_exponent: -dr,
                jac_num: vec![cr, ar - cr],
                jac_den: vec![cr - br, ar + br - cr],
                sign_exponent: dr - br,
            }
        }
        S3Case::C23 => {
            let base = HgmParameter::from_entries(a, c.add(d).sub(b), c, d);
            TwistedMotive {
                q_power: p.integral_count() as i32 - base.integral_count() as i32,
                base,
                theta_exponent: Rational64::zero(),
                eta_exponent: ar,
                jac_num: vec![br - dr, -br],
                jac_den: vec![cr - br, br - cr - dr],
                sign_exponent: cr,
            }
        }
    };
    if !tm.base.generic {
        return Err(HgmError::NonGeneric);
    }
    Ok(tm)
}

fn qpow(q: u64, e: i32) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(q));
    if e >= 0 {
        b.pow(e)
    } else {
        b.pow(-e).recip()
    }
}

fn twisted_trace_with(
    tm: &TwistedMotive,
    t0: &Rat,
    ctx: &PrimeFieldCtx,
    theta: Rational64,
    eta: Rational64,
    q_power: i32,
) -> Result<Cyclotomic<BigRational>, HgmError> {
    let m = [theta, eta].iter().fold(tm.level(), |acc, r| lcm(acc, *r.denom() as u64));
    let up = |x: Cyclotomic<BigRational>| x.change_level(m).map_err(|e| HgmError::Descent(e.to_string()));
    let h = up(finite_hyp_trace(&tm.base, t0, ctx)?)?;
    let j = up(ctx.jacobi_motive(&tm.jac_num, &tm.jac_den)?)?;
    let th: Cyclotomic<BigRational> = ctx.twist_theta(theta, t0)?.convert().expect("integers");
    let et: Cyclotomic<BigRational> = ctx.twist_eta(eta, t0)?.convert().expect("integers");
    let mut v = &(&h * &j) * &(&up(th)? * &up(et)?);
    if omega_sign(ctx.q(), tm.sign_exponent) == -1 {
        v = v.neg();
    }
    Ok(v.scale(&qpow(ctx.q(), q_power)))
}

/// Value at q of the twisted motive specialized at t0.
pub fn twisted_trace(tm: &TwistedMotive, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    twisted_trace_with(tm, t0, ctx, tm.theta_exponent, tm.eta_exponent, tm.q_power)
}

/// Point where the left side is evaluated.
pub fn lhs_point(g: S3Case, t0: &Rat) -> Rat {
    match g {
        S3Case::C12 => Rat::one() - t0,
        S3Case::C13 => t0.recip(),
        S3Case::C23 => t0 / (t0 - Rat::one()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct S3Row {
    pub q: u64,
    pub lhs: Cyclotomic<BigRational>,
    pub rhs: Cyclotomic<BigRational>,
    pub equal: bool,
    pub nominal_equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct S3Report {
    pub case: S3Case,
    pub rows: Vec<S3Row>,
    pub skipped: Vec<(u64, String)>,
    pub all_equal: bool,
}

/// Evaluate both sides at one prime; the inner `Err` names why q was skipped.
pub fn s3_row(p: &HgmParameter, g: S3Case, tm: &TwistedMotive, t0: &Rat, q: u64) -> Result<Result<S3Row, String>, HgmError> {
    let m = lcm(tm.level(), p.n);
    if (q - 1) % m != 0 {
        return Ok(Err("not split".into()));
    }
    let s = lhs_point(g, t0);
    for (par, pt) in [(p, &s), (&tm.base, t0)] {
        let c = classify_prime(par, pt, q)?;
        if c != PrimeClass::Good {
            return Ok(Err(format!("bad prime: {}", c)));
        }
    }
    let ctx = build_ctx(q, &[m])?;
    let lhs = finite_hyp_trace(p, &s, &ctx)?.change_level(m).map_err(|e| HgmError::Descent(e.to_string()))?;
    let rhs = twisted_trace(tm, t0, &ctx)?;
    let (pt, pe) = nominal_twists(p, g);
    let nominal = twisted_trace_with(tm, t0, &ctx, pt, pe, 0)?;
    Ok(Ok(S3Row { q, equal: lhs == rhs, nominal_equal: lhs == nominal, lhs, rhs }))
}

pub fn verify_s3(p: &HgmParameter, g: S3Case, t0: &Rat, primes: &[u64]) -> Result<S3Report, HgmError> {
    let minus_one = -Rat::one();
    if t0.is_zero() || t0.is_one() || (g == S3Case::C13 && *t0 == minus_one) {
        return Err(HgmError::DegeneratePoint);
    }
    let tm = s3_transform(p, g)?;
    let mut rows = vec![];
    let mut skipped = vec![];
    for &q in primes {
        match s3_row(p, g, &tm, t0, q)? {
            Ok(r) => rows.push(r),
            Err(why) => skipped.push((q, why)),
        }
    }
    let all_equal = !rows.is_empty() && rows.iter().all(|r| r.equal);
    Ok(S3Report { case: g, rows, skipped, all_equal })
}
