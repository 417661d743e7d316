//! Hypergeometric parameters, monodromy, prime classification and the
//! finite hypergeometric trace H_q.

use crate::cyclotomic::Cyclotomic;
use crate::finite_char::{CharError, CharacterExponent, PrimeFieldCtx};
use crate::ntheory::{euler_phi, gcd, lcm};
use crate::Rat;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::{BigRational, Rational64};
use num_traits::{Float, FloatConst, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HgmError {
    #[error("parameter is not generic")]
    NonGeneric,
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("prime {q} is not good for this specialization ({class})")]
    BadPrime { q: u64, class: String },
    #[error("specialization point must avoid 0 and 1")]
    DegeneratePoint,
    #[error("wild prime {0}: not computable")]
    Wild(u64),
    #[error("ramified: no trace (inertia order {0})")]
    Ramified(String),
    #[error("descent failure: {0}")]
    Descent(String),
    #[error("normalization needs an even number of integral entries")]
    OddIntegralCount,
    #[error("bad parameter string: {0}")]
    Parse(String),
}

/// Rational number modulo Z with representative in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalModZ {
    num: i64,
    den: i64,
}

impl RationalModZ {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let r = Rational64::new(num, den);
        Self::from_ratio(r)
    }

    pub fn from_ratio(r: Rational64) -> Self {
        let (n, d) = (*r.numer(), *r.denom());
        RationalModZ { num: n.rem_euclid(d), den: d }
    }

    pub fn zero() -> Self {
        RationalModZ { num: 0, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn ratio(&self) -> Rational64 {
        Rational64::new(self.num, self.den)
    }

    pub fn is_integral(&self) -> bool {
        self.num == 0
    }

    pub fn add(self, o: Self) -> Self {
        Self::from_ratio(self.ratio() + o.ratio())
    }

    pub fn sub(self, o: Self) -> Self {
        Self::from_ratio(self.ratio() - o.ratio())
    }

    pub fn neg(self) -> Self {
        Self::from_ratio(-self.ratio())
    }

    pub fn mul_int(self, r: i64) -> Self {
        Self::from_ratio(self.ratio() * r)
    }

    /// self·n as an integer mod n (den | n).
    pub fn units(&self, n: u64) -> i64 {
        assert!(n as i64 % self.den == 0, "denominator must divide the level");
        self.num * (n as i64 / self.den)
    }

    /// Order of exp(2πi·self).
    pub fn order(&self) -> u64 {
        self.den as u64
    }
}

impl fmt::Display for RationalModZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "1")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parse "n", "n/d" or "-n/d" as a small rational.
pub fn parse_small_rational(s: &str) -> Result<Rational64, HgmError> {
    let s = s.trim();
    let bad = || HgmError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// The parameter (a,b),(c,d), entries in Q/Z, order as given.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HgmParameter {
    pub a: RationalModZ,
    pub b: RationalModZ,
    pub c: RationalModZ,
    pub d: RationalModZ,
    /// lcm of the four denominators.
    pub n: u64,
    /// c + d − a − b on the [0,1) representatives.
    pub gamma: Rational64,
    pub generic: bool,
}

pub fn make_parameter(a: Rational64, b: Rational64, c: Rational64, d: Rational64) -> HgmParameter {
    HgmParameter::from_entries(
        RationalModZ::from_ratio(a),
        RationalModZ::from_ratio(b),
        RationalModZ::from_ratio(c),
        RationalModZ::from_ratio(d),
    )
}

impl HgmParameter {
    pub fn from_entries(a: RationalModZ, b: RationalModZ, c: RationalModZ, d: RationalModZ) -> Self {
        let n = [a, b, c, d].iter().fold(1u64, |acc, x| lcm(acc, x.den as u64));
        let gamma = c.ratio() + d.ratio() - a.ratio() - b.ratio();
        let generic = [a.sub(c), a.sub(d), b.sub(c), b.sub(d)].iter().all(|x| !x.is_integral());
        HgmParameter { a, b, c, d, n, gamma, generic }
    }

    /// Parse "a,b;c,d".
    pub fn parse(s: &str) -> Result<Self, HgmError> {
        let (top, bot) = s.split_once(';').ok_or_else(|| HgmError::Parse(s.to_string()))?;
        let t: Vec<&str> = top.split(',').collect();
        let b: Vec<&str> = bot.split(',').collect();
        if t.len() != 2 || b.len() != 2 {
            return Err(HgmError::Parse(s.to_string()));
        }
        Ok(make_parameter(
            parse_small_rational(t[0])?,
            parse_small_rational(t[1])?,
            parse_small_rational(b[0])?,
            parse_small_rational(b[1])?,
        ))
    }

    /// Sorted within each pair.
    pub fn canonicalize(&self) -> Self {
        let (a, b) = if self.a <= self.b { (self.a, self.b) } else { (self.b, self.a) };
        let (c, d) = if self.c <= self.d { (self.c, self.d) } else { (self.d, self.c) };
        Self::from_entries(a, b, c, d)
    }

    /// Number of integral entries among a, b, c, d.
    pub fn integral_count(&self) -> u32 {
        [self.a, self.b, self.c, self.d].iter().filter(|x| x.is_integral()).count() as u32
    }

    pub fn entries(&self) -> [RationalModZ; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// (ra, rb),(rc, rd).
    pub fn scale(&self, r: i64) -> Self {
        Self::from_entries(self.a.mul_int(r), self.b.mul_int(r), self.c.mul_int(r), self.d.mul_int(r))
    }

    pub fn to_json(&self) -> ParamJson {
        ParamJson { top: [self.a.to_string(), self.b.to_string()], bottom: [self.c.to_string(), self.d.to_string()] }
    }

    fn require_generic(&self) -> Result<(), HgmError> {
        if self.generic {
            Ok(())
        } else {
            Err(HgmError::NonGeneric)
        }
    }
}

impl fmt::Display for HgmParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{};{},{}", self.a, self.b, self.c, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamJson {
    pub top: [String; 2],
    pub bottom: [String; 2],
}

impl ParamJson {
    pub fn to_parameter(&self) -> Result<HgmParameter, HgmError> {
        HgmParameter::parse(&format!("{},{};{},{}", self.top[0], self.top[1], self.bottom[0], self.bottom[1]))
    }
}

/// Field of definition data: K = Q(ζ_N)^H.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldDescriptor {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "H")]
    pub h: Vec<u64>,
    pub degree: u64,
    pub totally_real: bool,
}

fn same_pair(x: (RationalModZ, RationalModZ), y: (RationalModZ, RationalModZ)) -> bool {
    (x.0 == y.0 && x.1 == y.1) || (x.0 == y.1 && x.1 == y.0)
}

pub fn symmetry_group(p: &HgmParameter) -> Result<FieldDescriptor, HgmError> {
    p.require_generic()?;
    let n = p.n;
    let h: Vec<u64> = (1..=n.max(1))
        .filter(|&r| r < n || n == 1)
        .filter(|&r| gcd(r, n) == 1)
        .filter(|&r| {
            let s = p.scale(r as i64);
            same_pair((s.a, s.b), (p.a, p.b)) && same_pair((s.c, s.d), (p.c, p.d))
        })
        .collect();
    let h = if n == 1 { vec![1] } else { h };
    let degree = euler_phi(n) / h.len() as u64;
    let totally_real = n <= 2 || h.contains(&(n - 1));
    Ok(FieldDescriptor { n, h, degree, totally_real })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonodromyKind {
    Diagonal,
    ScaledUnipotent,
}

/// diag(exp u1, exp u2) or exp(u)·[[1,1],[0,1]].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyMatrix {
    pub kind: MonodromyKind,
    pub exps: Vec<RationalModZ>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{}", n),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl MonodromyMatrix {
    fn diag(u1: RationalModZ, u2: RationalModZ) -> Self {
        MonodromyMatrix { kind: MonodromyKind::Diagonal, exps: vec![u1, u2] }
    }
    fn scaled(u: RationalModZ) -> Self {
        MonodromyMatrix { kind: MonodromyKind::ScaledUnipotent, exps: vec![u] }
    }

    /// Determinant as an exponent of exp(2πi·).
    pub fn det(&self) -> RationalModZ {
        match self.kind {
            MonodromyKind::Diagonal => self.exps[0].add(self.exps[1]),
            MonodromyKind::ScaledUnipotent => self.exps[0].mul_int(2),
        }
    }

    /// r-th power (r ≥ 1).
    pub fn power(&self, r: u64) -> Self {
        MonodromyMatrix { kind: self.kind, exps: self.exps.iter().map(|e| e.mul_int(r as i64)).collect() }
    }

    pub fn order(&self) -> Order {
        monodromy_order(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "exponents": self.exps.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "order": self.order().to_string(),
        })
    }
}

pub fn monodromy_order(m: &MonodromyMatrix) -> Order {
    match m.kind {
        MonodromyKind::Diagonal => Order::Finite(lcm(m.exps[0].order(), m.exps[1].order())),
        MonodromyKind::ScaledUnipotent => Order::Infinite,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Point {
    Zero,
    One,
    Infinity,
}

pub fn monodromy(p: &HgmParameter, point: Point) -> Result<MonodromyMatrix, HgmError> {
    p.require_generic()?;
    Ok(match point {
        Point::Zero => {
            if p.c.sub(p.d).is_integral() {
                MonodromyMatrix::scaled(p.c.neg())
            } else {
                MonodromyMatrix::diag(p.c.neg(), p.d.neg())
            }
        }
        Point::One => {
            let g = RationalModZ::from_ratio(p.gamma);
            if g.is_integral() {
                MonodromyMatrix::scaled(RationalModZ::zero())
            } else {
                MonodromyMatrix::diag(RationalModZ::zero(), g)
            }
        }
        Point::Infinity => {
            if p.a.sub(p.b).is_integral() {
                MonodromyMatrix::scaled(p.a)
            } else {
                MonodromyMatrix::diag(p.a, p.b)
            }
        }
    })
}

/// v_q of a nonzero rational.
pub fn valuation(t: &Rat, q: u64) -> i64 {
    crate::ntheory::val_big(t.numer(), q) as i64 - crate::ntheory::val_big(t.denom(), q) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeClass {
    Good,
    Tame0(i64),
    Tame1(i64),
    TameInf(i64),
    Wild,
}

impl fmt::Display for PrimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeClass::Good => write!(f, "good"),
            PrimeClass::Tame0(r) => write!(f, "tame0({})", r),
            PrimeClass::Tame1(r) => write!(f, "tame1({})", r),
            PrimeClass::TameInf(r) => write!(f, "tameInf({})", r),
            PrimeClass::Wild => write!(f, "wild"),
        }
    }
}

pub fn classify_prime(p: &HgmParameter, t0: &Rat, q: u64) -> Result<PrimeClass, HgmError> {
    if t0.is_zero() || t0.is_one() {
        return Err(HgmError::DegeneratePoint);
    }
    if p.n % q == 0 {
        return Ok(PrimeClass::Wild);
    }
    let v = valuation(t0, q);
    if v > 0 {
        return Ok(PrimeClass::Tame0(v));
    }
    if v < 0 {
        return Ok(PrimeClass::TameInf(v));
    }
    let v1 = valuation(&(t0 - Rat::one()), q);
    if v1 > 0 {
        return Ok(PrimeClass::Tame1(v1));
    }
    Ok(PrimeClass::Good)
}

/// Order of the image of tame inertia at q.
pub fn tame_inertia_order(p: &HgmParameter, t0: &Rat, q: u64) -> Result<Order, HgmError> {
    match classify_prime(p, t0, q)? {
        PrimeClass::Wild => Err(HgmError::Wild(q)),
        PrimeClass::Good => Ok(Order::Finite(1)),
        PrimeClass::Tame0(r) => Ok(monodromy(p, Point::Zero)?.power(r as u64).order()),
        PrimeClass::Tame1(r) => Ok(monodromy(p, Point::One)?.power(r as u64).order()),
        PrimeClass::TameInf(r) => Ok(monodromy(p, Point::Infinity)?.power((-r) as u64).order()),
    }
}

fn good_residue(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<u64, HgmError> {
    p.require_generic()?;
    ctx.check_level(p.n)?;
    let class = classify_prime(p, t0, ctx.q())?;
    if class != PrimeClass::Good {
        return Err(HgmError::BadPrime { q: ctx.q(), class: class.to_string() });
    }
    Ok(ctx.residue(t0).expect("good prime"))
}

/// Exact H_q((a,b),(c,d) | t0) in Q(ζ_N).
///
/// Computed through the character-sum form
/// H = −E·J(−A,C)·J(−B,D)/(n₁n₂), E = Σ_x ϖ^A(x)ϖ^{−C}(1−x)ϖ^B(y)ϖ^{−D}(1−y),
/// y = (1−x)/(1−x+xt), with n₁ = q when A, C are both nontrivial (else 1),
/// likewise n₂. Equal to the Gauss-sum definition (see `finite_hyp_trace_gauss`).
pub fn finite_hyp_trace(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    let t = good_residue(p, t0, ctx)?;
    Ok(hyp_trace_residue(p, t, ctx))
}

/// H_q at a residue t ∉ {0, 1} mod q (p generic, N | q−1 assumed).
pub fn hyp_trace_residue(p: &HgmParameter, t: u64, ctx: &PrimeFieldCtx) -> Cyclotomic<BigRational> {
    let n = p.n;
    let ni = n as i64;
    let q = ctx.q();
    let (an, bn, cn, dn) = (p.a.units(n), p.b.units(n), p.c.units(n), p.d.units(n));
    let lt = ctx.dlog_unchecked(t % q) as i64;
    let mut e = vec![0i64; n as usize];
    for x in 2..q {
        let one_minus = q + 1 - x;
        let den = (one_minus + x * t % q) % q;
        if den == 0 {
            continue;
        }
        let lx = ctx.dlog_unchecked(x) as i64;
        let l1x = ctx.dlog_unchecked(one_minus) as i64;
        let lden = ctx.dlog_unchecked(den) as i64;
        let ly = l1x - lden;
        let l1y = lx + lt - lden;
        let k = (an * lx - cn * l1x + bn * ly - dn * l1y).rem_euclid(ni);
        e[k as usize] += 1;
    }
    let j1 = ctx.jacobi_group(n, -an, cn);
    let j2 = ctx.jacobi_group(n, -bn, dn);
    let prod = group_mul(&group_mul(&e, &j1), &j2);
    let n1 = if an != 0 && cn != 0 { q } else { 1 };
    let n2 = if bn != 0 && dn != 0 { q } else { 1 };
    let val: Cyclotomic<BigRational> = Cyclotomic::<i64>::from_group_ring(n, prod).convert().expect("integers");
    val.scale(&BigRational::new(BigInt::from(-1), BigInt::from(n1 * n2)))
}

fn group_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len();
    let mut out = vec![0i64; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[(i + j) % n] += x * y;
        }
    }
    out
}

/// H_q by the Gauss-sum definition, summing over all q−1 characters at
/// level q(q−1) and descending to level N. Independent of
/// `finite_hyp_trace`; cost grows like q³, intended for q ≲ 50.
pub fn finite_hyp_trace_gauss(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    finite_hyp_trace_gauss_psi(p, t0, ctx, 1)
}

/// Gauss-sum definition with additive character ψ_s(x) = ζ_q^{sx}.
pub fn finite_hyp_trace_gauss_psi(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx, s: u64) -> Result<Cyclotomic<BigRational>, HgmError> {
    let t = good_residue(p, t0, ctx)?;
    let q = ctx.q();
    let qm1 = q - 1;
    let lev = ctx.gauss_level();
    let exp = |r: RationalModZ| r.units(qm1);
    let (a, b, c, d) = (exp(p.a), exp(p.b), exp(p.c), exp(p.d));
    let g = |m: i64| ctx.gauss_sum_psi(CharacterExponent(m.rem_euclid(qm1 as i64) as u64), s);
    // 1/g(x) = (−1)^x g(−x)/q for x ≢ 0, and 1/g(0) = −1.
    let mut qpow = 0u32;
    let mut inv_num = |x: i64| -> Cyclotomic<i128> {
        if x.rem_euclid(qm1 as i64) == 0 {
            Cyclotomic::from_int(lev, -1)
        } else {
            qpow += 1;
            let v = (*g(-x)).clone();
            if x.rem_euclid(2) == 1 {
                v.neg()
            } else {
                v
            }
        }
    };
    let constant = &(&inv_num(a) * &inv_num(-c)) * &(&inv_num(b) * &inv_num(-d));
    let lt = ctx.dlog_unchecked(t) as i64;
    let mut total = Cyclotomic::<i128>::zero(lev);
    for m in 0..qm1 as i64 {
        let term = &(&*g(m + a) * &*g(-m - c)) * &(&*g(m + b) * &*g(-m - d));
        // ϖ(t)^m = ζ_{q(q−1)}^{q·m·L(t)}
        let tw = Cyclotomic::<i128>::zeta_pow(lev, (q as i64) * ((m * lt) % qm1 as i64));
        total = &total + &(&term * &tw);
    }
    let total = &total * &constant;
    let denom = BigInt::from(1 - q as i64) * BigInt::from(q).pow(qpow);
    let val = total.to_rational().scale(&BigRational::new(BigInt::one(), denom));
    val.change_level(p.n).map_err(|e| HgmError::Descent(e.to_string()))
}

/// Floating evaluation of the Gauss-sum definition under ζ_N ↦ e^{2πi/N}.
pub fn finite_hyp_trace_float<F: Float + FloatConst>(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Complex<F>, HgmError> {
    let t = good_residue(p, t0, ctx)?;
    let q = ctx.q();
    let qm1 = q - 1;
    let tau = F::TAU();
    let fq = F::from(q).unwrap();
    let fqm1 = F::from(qm1).unwrap();
    let gs: Vec<Complex<F>> = (0..qm1)
        .map(|m| {
            let mut acc = Complex::new(F::zero(), F::zero());
            for x in 1..q {
                let l = (m * ctx.dlog_unchecked(x)) % qm1;
                let ang = tau * (F::from(x).unwrap() / fq + F::from(l).unwrap() / fqm1);
                acc = acc + Complex::new(ang.cos(), ang.sin());
            }
            acc
        })
        .collect();
    let g = |m: i64| gs[m.rem_euclid(qm1 as i64) as usize];
    let e = |r: RationalModZ| r.units(qm1);
    let (a, b, c, d) = (e(p.a), e(p.b), e(p.c), e(p.d));
    let lt = ctx.dlog_unchecked(t) as i64;
    let denom = g(a) * g(-c) * g(b) * g(-d);
    let mut total = Complex::new(F::zero(), F::zero());
    for m in 0..qm1 as i64 {
        let ang = tau * F::from((m * lt) % qm1 as i64).unwrap() / fqm1;
        total = total + g(m + a) * g(-m - c) * g(m + b) * g(-m - d) * Complex::new(ang.cos(), ang.sin());
    }
    Ok(total / denom / F::from(1.0 - q as f64).unwrap())
}

/// T = q^{1−k/2}·H where k counts integral entries (k even).
pub fn normalized_trace(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    let h = finite_hyp_trace(p, t0, ctx)?;
    normalize(p, &h, ctx.q())
}

/// Multiply an H-value by q^{1−k/2}.
pub fn normalize(p: &HgmParameter, h: &Cyclotomic<BigRational>, q: u64) -> Result<Cyclotomic<BigRational>, HgmError> {
    let k = p.integral_count();
    if k % 2 == 1 {
        return Err(HgmError::OddIntegralCount);
    }
    let e = 1 - (k as i32) / 2;
    let f = if e >= 0 {
        BigRational::from_integer(BigInt::from(q).pow(e as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(q).pow((-e) as u32))
    };
    Ok(h.scale(&f))
}

/// (−1)^{(q−1)·x}, i.e. ω(−1)^{N·x} for rational x with N·x ∈ Z.
pub fn omega_sign(q: u64, x: Rational64) -> i64 {
    let v = Rational64::from_integer(q as i64 - 1) * x;
    assert!(v.is_integer(), "sign exponent must be integral after scaling");
    if v.to_integer().rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// ω(−1)^{N(d−b)}·J([−a,−b,c,d],[c−b,d−a]): the factor relating the
/// ζ_N-eigenspace trace of Euler's curve to H_q.
pub fn euler_prefactor(p: &HgmParameter, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    let (a, b, c, d) = (p.a.ratio(), p.b.ratio(), p.c.ratio(), p.d.ratio());
    let j = ctx.jacobi_motive(&[-a, -b, c, d], &[c - b, d - a])?;
    let j = j.change_level(p.n).map_err(|e| HgmError::Descent(e.to_string()))?;
    let s = omega_sign(ctx.q(), d - b);
    Ok(if s == 1 { j } else { j.neg() })
}

/// Split a rational t0 with v_q(t0) ≠ 0 into (v, unit part mod q).
pub fn unit_part(t0: &Rat, q: u64) -> (i64, u64) {
    let v = valuation(t0, q);
    let qb = BigRational::from_integer(BigInt::from(q));
    let u = if v >= 0 { t0 / qb.pow(v as i32) } else { t0 * qb.pow((-v) as i32) };
    let n = crate::ntheory::mod_big(u.numer(), q);
    let d = crate::ntheory::mod_big(u.denom(), q);
    (v, crate::ntheory::mul_mod(n, crate::ntheory::pow_mod(d, q - 2, q), q))
}

/// The two-term trace at a prime where t0 reduces to 0, as a
/// function of the unit residue t̃:
/// −(ω(t̃)^{dN} J(ω^{(d−b)N}, ω^{(b−c)N}) + ω(−1)^{(b−c)N} ω(t̃)^{cN} J(ω^{(d−c)N}, ω^{(a−d)N})).
pub fn degenerate_zero_residue(p: &HgmParameter, tt: u64, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<i64>, HgmError> {
    p.require_generic()?;
    let n = p.n;
    ctx.check_level(n)?;
    let u = |r: RationalModZ| r.units(n);
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let w = ctx.omega_exponent(n, tt)? as i64;
    let t1 = &Cyclotomic::zeta_pow(n, w * u(d)) * &ctx.jacobi_level(n, u(d.sub(b)), u(b.sub(c)));
    let sign = omega_sign(ctx.q(), b.ratio() - c.ratio());
    let t2 = &Cyclotomic::zeta_pow(n, w * u(c)) * &ctx.jacobi_level(n, u(d.sub(c)), u(a.sub(d)));
    let t2 = if sign == 1 { t2 } else { t2.neg() };
    Ok((&t1 + &t2).neg())
}

/// Mirror at ∞: −(ω(t̃)^{bN} J(ω^{(d−b)N}, ω^{(a−d)N}) + ω(−1)^{(a−d)N} ω(t̃)^{aN} J(ω^{(a−b)N}, ω^{(b−c)N})).
pub fn degenerate_infinity_residue(p: &HgmParameter, tt: u64, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<i64>, HgmError> {
    p.require_generic()?;
    let n = p.n;
    ctx.check_level(n)?;
    let u = |r: RationalModZ| r.units(n);
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let w = ctx.omega_exponent(n, tt)? as i64;
    let t1 = &Cyclotomic::zeta_pow(n, w * u(b)) * &ctx.jacobi_level(n, u(d.sub(b)), u(a.sub(d)));
    let sign = omega_sign(ctx.q(), a.ratio() - d.ratio());
    let t2 = &Cyclotomic::zeta_pow(n, w * u(a)) * &ctx.jacobi_level(n, u(a.sub(b)), u(b.sub(c)));
    let t2 = if sign == 1 { t2 } else { t2.neg() };
    Ok((&t1 + &t2).neg())
}

fn check_unramified(p: &HgmParameter, t0: &Rat, q: u64, want_zero: bool) -> Result<(), HgmError> {
    let class = classify_prime(p, t0, q)?;
    let ok_side = matches!((class, want_zero), (PrimeClass::Tame0(_), true) | (PrimeClass::TameInf(_), false));
    if !ok_side {
        return Err(HgmError::BadPrime { q, class: class.to_string() });
    }
    let ord = tame_inertia_order(p, t0, q)?;
    if ord != Order::Finite(1) {
        return Err(HgmError::Ramified(ord.to_string()));
    }
    Ok(())
}

/// Degenerate trace for v_q(t0) > 0 with unramified inertia.
pub fn degenerate_trace_at_zero(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<i64>, HgmError> {
    check_unramified(p, t0, ctx.q(), true)?;
    let (_, tt) = unit_part(t0, ctx.q());
    degenerate_zero_residue(p, tt, ctx)
}

/// Degenerate trace for v_q(t0) < 0 with unramified inertia.
pub fn degenerate_trace_at_infinity(p: &HgmParameter, t0: &Rat, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<i64>, HgmError> {
    check_unramified(p, t0, ctx.q(), false)?;
    let (_, tt) = unit_part(t0, ctx.q());
    degenerate_infinity_residue(p, tt, ctx)
}

/// Degenerate trace rescaled to the normalization of `normalized_trace`:
/// q^{1−k/2} · value / euler_prefactor.
pub fn normalize_degenerate(p: &HgmParameter, value: &Cyclotomic<i64>, ctx: &PrimeFieldCtx) -> Result<Cyclotomic<BigRational>, HgmError> {
    let pre = euler_prefactor(p, ctx)?;
    let inv = pre.inverse().expect("prefactor is a nonzero Gauss-sum ratio");
    let v: Cyclotomic<BigRational> = value.convert().expect("integers");
    normalize(p, &(&v * &inv), ctx.q())
}

/// |z| ≤ 2√q + slack in every complex embedding.
pub fn weil_bound_holds(x: &Cyclotomic<BigRational>, q: u64, slack: f64) -> bool {
    let bound = 2.0 * (q as f64).sqrt() + slack;
    let n = x.level();
    (1..=n).filter(|&k| gcd(k, n) == 1).all(|k| {
        let e = x.embed_complex::<f64>(k as i64).expect("unit");
        e.re.hypot(e.im) <= bound
    })
}

/// Canonical exponent of ω(−1) as ±1 (helper for reports).
pub fn sign_to_int(x: &Cyclotomic<BigRational>) -> Option<i64> {
    x.as_scalar().and_then(|s| s.to_integer().to_i64()).filter(|v| v.abs() == 1)
}

/// Rational from a small numerator and denominator.
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "n" or "n/d" into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, HgmError> {
    crate::cyclotomic::parse_rational(s).ok_or_else(|| HgmError::Parse(s.to_string()))
}

/// Integral check helper used by reports.
pub fn is_integral(x: &Cyclotomic<BigRational>) -> bool {
    x.coeffs().iter().all(|c| c.is_integer())
}

