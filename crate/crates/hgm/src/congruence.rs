//! The relation ~_p on parameters and trace congruences modulo primes above p.

use crate::cyclotomic::{Cyclotomic, PrimeIdealReduction};
use crate::ffext::FfElem;
use crate::finite_char::build_ctx;
use crate::hgm_core::{classify_prime, finite_hyp_trace, HgmError, HgmParameter, PrimeClass, RationalModZ};
use crate::ntheory::lcm;
use crate::Rat;
use num_rational::BigRational;
use serde::Serialize;

/// True iff the denominator of x − y is a power of p (p⁰ included).
pub fn sim_p(x: RationalModZ, y: RationalModZ, p: u64) -> bool {
    let mut d = x.sub(y).den() as u64;
    while d % p == 0 {
        d /= p;
    }
    d == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Pairing {
    pub swap_top: bool,
    pub swap_bottom: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceClaim {
    #[serde(serialize_with = "ser_param")]
    pub left: HgmParameter,
    #[serde(serialize_with = "ser_param")]
    pub right: HgmParameter,
    pub p: u64,
    pub pairing: Pairing,
}

fn ser_param<S: serde::Serializer>(p: &HgmParameter, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Search the four pair orientations for a componentwise ~_p witness.
pub fn params_congruent(left: &HgmParameter, right: &HgmParameter, p: u64) -> Option<CongruenceClaim> {
    for swap_top in [false, true] {
        for swap_bottom in [false, true] {
            let (ra, rb) = if swap_top { (right.b, right.a) } else { (right.a, right.b) };
            let (rc, rd) = if swap_bottom { (right.d, right.c) } else { (right.c, right.d) };
            if sim_p(left.a, ra, p) && sim_p(left.b, rb, p) && sim_p(left.c, rc, p) && sim_p(left.d, rd, p) {
                return Some(CongruenceClaim {
                    left: left.clone(),
                    right: right.clone(),
                    p,
                    pairing: Pairing { swap_top, swap_bottom },
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceRow {
    pub q: u64,
    pub left: FfElem,
    pub right: FfElem,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    pub p: u64,
    pub level: u64,
    pub residue_degree: u32,
    pub rows: Vec<CongruenceRow>,
    pub skipped: Vec<(u64, String)>,
    pub all_equal: bool,
}

fn admissible(params: &[&HgmParameter], t0: &Rat, q: u64, m: u64, p: u64) -> Result<Option<String>, HgmError> {
    if q == p || (q - 1) % m != 0 {
        return Ok(Some("not split".into()));
    }
    for par in params {
        let c = classify_prime(par, t0, q)?;
        if c != PrimeClass::Good {
            return Ok(Some(format!("bad prime: {}", c)));
        }
    }
    Ok(None)
}

fn lifted(par: &HgmParameter, t0: &Rat, q: u64, m: u64) -> Result<Cyclotomic<BigRational>, HgmError> {
    let ctx = build_ctx(q, &[m])?;
    finite_hyp_trace(par, t0, &ctx)?.change_level(m).map_err(|e| HgmError::Descent(e.to_string()))
}

/// Compare both traces in a common residue field above p.
pub fn verify_congruence(claim: &CongruenceClaim, t0: &Rat, primes: &[u64]) -> Result<CongruenceReport, HgmError> {
    let m = lcm(claim.left.n, claim.right.n);
    let red = PrimeIdealReduction::new(m, claim.p);
    let mut rows = vec![];
    let mut skipped = vec![];
    for &q in primes {
        if let Some(why) = admissible(&[&claim.left, &claim.right], t0, q, m, claim.p)? {
            skipped.push((q, why));
            continue;
        }
        let l = red.reduce(&lifted(&claim.left, t0, q, m)?).map_err(|e| HgmError::Descent(e.to_string()))?;
        let r = red.reduce(&lifted(&claim.right, t0, q, m)?).map_err(|e| HgmError::Descent(e.to_string()))?;
        rows.push(CongruenceRow { q, equal: l == r, left: l, right: r });
    }
    let all_equal = !rows.is_empty() && rows.iter().all(|r| r.equal);
    Ok(CongruenceReport { p: claim.p, level: m, residue_degree: red.f, rows, skipped, all_equal })
}

/// H_q ≡ 1 + q modulo a prime above p, for parameters ~_p (1,1),(1,1).
pub fn eisenstein_check(param: &HgmParameter, p: u64, t0: &Rat, primes: &[u64]) -> Result<CongruenceReport, HgmError> {
    if !param.entries().iter().all(|x| sim_p(*x, RationalModZ::zero(), p)) {
        return Err(HgmError::Parse(format!("{} is not ~_{} to (1,1),(1,1)", param, p)));
    }
    let m = param.n;
    let red = PrimeIdealReduction::new(m, p);
    let mut rows = vec![];
    let mut skipped = vec![];
    for &q in primes {
        if let Some(why) = admissible(&[param], t0, q, m, p)? {
            skipped.push((q, why));
            continue;
        }
        let l = red.reduce(&lifted(param, t0, q, m)?).map_err(|e| HgmError::Descent(e.to_string()))?;
        let r = red.reduce(&Cyclotomic::<i64>::from_int(m, 1 + q as i64)).expect("integer");
        rows.push(CongruenceRow { q, equal: l == r, left: l, right: r });
    }
    let all_equal = !rows.is_empty() && rows.iter().all(|r| r.equal);
    Ok(CongruenceReport { p, level: m, residue_degree: red.f, rows, skipped, all_equal })
}
