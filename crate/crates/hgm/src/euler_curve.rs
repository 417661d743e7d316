//! Euler's curve y^N = x^A (1−x)^B (1−tx)^C t^D and its eigenspace sums.

use crate::cyclotomic::Cyclotomic;
use crate::finite_char::PrimeFieldCtx;
use crate::hgm_core::{classify_prime, euler_prefactor, finite_hyp_trace, omega_sign, HgmError, HgmParameter, PrimeClass};
use crate::Rat;
use num_rational::BigRational;
use serde::Serialize;

/// Exponents A=(d−b)N, B=(b−c)N, C=(a−d)N, D=dN reduced to [0, N).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EulerCurve {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    #[serde(skip)]
    pub t0: Option<Rat>,
}

pub fn exponents_from_params(p: &HgmParameter) -> Result<EulerCurve, HgmError> {
    if !p.generic {
        return Err(HgmError::NonGeneric);
    }
    let n = p.n;
    let u = |x: crate::hgm_core::RationalModZ| x.units(n) as u64;
    Ok(EulerCurve { n, a: u(p.d.sub(p.b)), b: u(p.b.sub(p.c)), c: u(p.a.sub(p.d)), d: u(p.d), t0: None })
}

impl EulerCurve {
    pub fn with_t(mut self, t0: Rat) -> Self {
        self.t0 = Some(t0);
        self
    }

    fn residue(&self, ctx: &PrimeFieldCtx) -> Result<u64, HgmError> {
        ctx.check_level(self.n)?;
        let t0 = self.t0.as_ref().ok_or(HgmError::DegeneratePoint)?;
        let q = ctx.q();
        let bad = |c: PrimeClass| HgmError::BadPrime { q, class: c.to_string() };
        let t = ctx.residue(t0).ok_or(bad(PrimeClass::TameInf(-1)))?;
        if t == 0 {
            return Err(bad(PrimeClass::Tame0(1)));
        }
        if t == 1 {
            return Err(bad(PrimeClass::Tame1(1)));
        }
        Ok(t)
    }

    /// Discrete log of f(x) = x^A(1−x)^B(1−tx)^C t^D, or None when f(x) = 0.
    fn log_rhs(&self, x: u64, t: u64, ctx: &PrimeFieldCtx) -> Option<u64> {
        let q = ctx.q();
        let factors = [(x, self.a), ((q + 1 - x) % q, self.b), ((q + 1 - x * t % q) % q, self.c), (t, self.d)];
        let mut l = 0u64;
        for (v, e) in factors {
            if e == 0 {
                continue;
            }
            l += e * ctx.dlog(v)?;
        }
        Some(l % (q - 1))
    }

    /// Group-ring vector of Σ_{f(x)≠0} ω(f(x))^{·}: entry k counts x with L(f(x)) ≡ k mod N.
    fn log_histogram(&self, t: u64, ctx: &PrimeFieldCtx) -> (Vec<i64>, u64) {
        let mut h = vec![0i64; self.n as usize];
        let mut zeros = 0;
        for x in 0..ctx.q() {
            match self.log_rhs(x, t, ctx) {
                Some(l) => h[(l % self.n) as usize] += 1,
                None => zeros += 1,
            }
        }
        (h, zeros)
    }
}

/// #{(x,y) ∈ F_q² : y^N = f(x)}.
pub fn affine_count(ec: &EulerCurve, ctx: &PrimeFieldCtx) -> Result<u64, HgmError> {
    let t = ec.residue(ctx)?;
    let (h, zeros) = ec.log_histogram(t, ctx);
    // f(x) ≠ 0 has N roots iff it is an N-th power
    Ok(zeros + ec.n * h[0] as u64)
}

/// −Σ_{f(x)≠0} ω^j(f(x)), exact at level N.
pub fn eigenspace_char_sum(ec: &EulerCurve, j: u64, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<i64>, HgmError> {
    let t = ec.residue(ctx)?;
    let (h, _) = ec.log_histogram(t, ctx);
    let n = ec.n as usize;
    let mut v = vec![0i64; n];
    for (k, c) in h.iter().enumerate() {
        v[(k * j as usize) % n] -= c;
    }
    Ok(Cyclotomic::from_group_ring(ec.n, v))
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceFrobReport {
    pub q: u64,
    /// Eigenspace sum for ω.
    pub lhs: Cyclotomic<BigRational>,
    /// ω(−1)^{N(d−b)} J([−a,−b,c,d],[c−b,d−a]) H.
    pub rhs: Cyclotomic<BigRational>,
    pub equal: bool,
    /// lhs − rhs.
    pub correction: Cyclotomic<BigRational>,
    /// Eigenspace sum for ω^{−1} against ω(−1)^{N(d−b)} J([a,b,−c,−d],[b−c,a−d]) H.
    pub conjugate_equal: bool,
}

pub fn verify_trace_frob(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<TraceFrobReport, HgmError> {
    let class = classify_prime(p, t0, ctx.q())?;
    if class != PrimeClass::Good {
        return Err(HgmError::BadPrime { q: ctx.q(), class: class.to_string() });
    }
    let ec = exponents_from_params(p)?.with_t(t0.clone());
    let h = finite_hyp_trace(p, t0, ctx)?;
    let lhs: Cyclotomic<BigRational> = eigenspace_char_sum(&ec, 1, ctx)?.convert().expect("integers");
    let rhs = &euler_prefactor(p, ctx)? * &h;
    let correction = &lhs - &rhs;
    let equal = correction.is_zero();

    let (a, b, c, d) = (p.a.ratio(), p.b.ratio(), p.c.ratio(), p.d.ratio());
    let jc = ctx.jacobi_motive(&[a, b, -c, -d], &[b - c, a - d])?;
    let jc = jc.change_level(p.n).map_err(|e| HgmError::Descent(e.to_string()))?;
    let jc = if omega_sign(ctx.q(), d - b) == 1 { jc } else { jc.neg() };
    let lhs_c: Cyclotomic<BigRational> =
        eigenspace_char_sum(&ec, p.n.saturating_sub(1).max(1), ctx)?.convert().expect("integers");
    let conjugate_equal = lhs_c == &jc * &h;
    Ok(TraceFrobReport { q: ctx.q(), lhs, rhs, equal, correction, conjugate_equal })
}
