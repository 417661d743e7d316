//! Elliptic curves over Q: the six rational families, Frey curves, point
//! counts, Tate's algorithm and the conductor exponent at 2 for Legendre.

use crate::finite_char::build_ctx;
use crate::hgm_core::{make_parameter, normalized_trace, valuation, HgmParameter, PrimeClass};
use crate::ntheory::{is_prime, legendre, mod_big, squarefree_kernel, val_big};
use crate::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EllipticError {
    #[error("singular curve (zero discriminant)")]
    Singular,
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("not a solution of the associated Fermat equation")]
    NotASolution,
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("specialization point must avoid 0 and 1")]
    DegeneratePoint,
}

/// Global sign between H_q and a_q: H_q(Legendre | t0) = LEGENDRE_EPSILON · a_q.
/// Fixed at (q, t0) = (5, 2), where a_5 = −2.
pub const LEGENDRE_EPSILON: i64 = 1;

fn q(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Long Weierstrass model y² + a1xy + a3y = x³ + a2x² + a4x + a6.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EllipticCurveQ {
    pub a1: Rat,
    pub a2: Rat,
    pub a3: Rat,
    pub a4: Rat,
    pub a6: Rat,
}

impl fmt::Display for EllipticCurveQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}, {}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl EllipticCurveQ {
    pub fn new(a1: Rat, a2: Rat, a3: Rat, a4: Rat, a6: Rat) -> Result<Self, EllipticError> {
        let e = EllipticCurveQ { a1, a2, a3, a4, a6 };
        if e.discriminant().is_zero() {
            Err(EllipticError::Singular)
        } else {
            Ok(e)
        }
    }

    pub fn from_ints(a: [i64; 5]) -> Result<Self, EllipticError> {
        Self::new(q(a[0]), q(a[1]), q(a[2]), q(a[3]), q(a[4]))
    }

    pub fn b_invariants(&self) -> [Rat; 4] {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = a1 * a1 + q(4) * a2;
        let b4 = q(2) * a4 + a1 * a3;
        let b6 = a3 * a3 + q(4) * a6;
        let b8 = a1 * a1 * a6 + q(4) * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        [b2, b4, b6, b8]
    }

    pub fn c4(&self) -> Rat {
        let [b2, b4, _, _] = self.b_invariants();
        &b2 * &b2 - q(24) * b4
    }

    pub fn c6(&self) -> Rat {
        let [b2, b4, b6, _] = self.b_invariants();
        -(&b2 * &b2 * &b2) + q(36) * &b2 * b4 - q(216) * b6
    }

    pub fn discriminant(&self) -> Rat {
        let [b2, b4, b6, b8] = self.b_invariants();
        -(&b2 * &b2 * b8) - q(8) * &b4 * &b4 * &b4 - q(27) * &b6 * &b6 + q(9) * b2 * b4 * b6
    }

    pub fn j_invariant(&self) -> Rat {
        let c4 = self.c4();
        &c4 * &c4 * &c4 / self.discriminant()
    }

    /// Isomorphic model with integer coefficients (scaling by the lcm of denominators).
    pub fn integral_model(&self) -> IntModel {
        let u = [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let scale = |a: &Rat, i: u32| (a * Rat::from_integer(u.pow(i))).to_integer();
        IntModel {
            a1: scale(&self.a1, 1),
            a2: scale(&self.a2, 2),
            a3: scale(&self.a3, 3),
            a4: scale(&self.a4, 4),
            a6: scale(&self.a6, 6),
        }
    }

    /// a_ℓ = ℓ + 1 − #E(F_ℓ) at a prime of good reduction.
    pub fn ap(&self, ell: u64) -> Result<i64, EllipticError> {
        if !is_prime(ell) {
            return Err(EllipticError::NotPrime(ell));
        }
        let t = tate(&self.integral_model(), ell);
        if t.conductor_exponent != 0 {
            return Err(EllipticError::BadReduction(ell));
        }
        Ok(ell as i64 + 1 - t.minimal_model.count_points(ell) as i64)
    }

    pub fn is_good_at(&self, ell: u64) -> bool {
        tate(&self.integral_model(), ell).conductor_exponent == 0
    }
}

/// Integral long Weierstrass model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IntModel {
    #[serde(serialize_with = "ser_big")]
    pub a1: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub a2: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub a3: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub a4: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub a6: BigInt,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl IntModel {
    pub fn to_curve(&self) -> EllipticCurveQ {
        let r = |x: &BigInt| Rat::from_integer(x.clone());
        EllipticCurveQ { a1: r(&self.a1), a2: r(&self.a2), a3: r(&self.a3), a4: r(&self.a4), a6: r(&self.a6) }
    }

    /// Substitution x = x' + r, y = y' + s x' + t.
    fn rst(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> IntModel {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        IntModel {
            a1: a1 + 2 * s,
            a2: a2 - s * a1 + 3 * r - s * s,
            a3: a3 + r * a1 + 2 * t,
            a4: a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6: a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1,
        }
    }

    /// Projective point count of the reduction mod ℓ (including ∞).
    pub fn count_points(&self, ell: u64) -> u64 {
        let m = |x: &BigInt| mod_big(x, ell);
        let (a1, a2, a3, a4, a6) = (m(&self.a1), m(&self.a2), m(&self.a3), m(&self.a4), m(&self.a6));
        let l = ell as u128;
        let mut count = 1u64;
        if ell == 2 || ell == 3 {
            for x in 0..l {
                for y in 0..l {
                    let lhs = (y * y + a1 as u128 * x * y + a3 as u128 * y) % l;
                    let rhs = (x * x * x + a2 as u128 * x * x + a4 as u128 * x + a6 as u128) % l;
                    if lhs == rhs {
                        count += 1;
                    }
                }
            }
            return count;
        }
        // (2y + a1x + a3)² = 4(x³ + a2x² + a4x + a6) + (a1x + a3)²
        for x in 0..l {
            let lin = (a1 as u128 * x + a3 as u128) % l;
            let cub = (x * x % l * x + a2 as u128 * x % l * x + a4 as u128 * x + a6 as u128) % l;
            let d = ((4 * cub + lin * lin) % l) as i64;
            count += (1 + legendre(d, ell)) as u64;
        }
        count
    }

    fn disc(&self) -> BigInt {
        self.to_curve().discriminant().to_integer()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::In(n) => write!(f, "I{}", n),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::InStar(n) => write!(f, "I{}*", n),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TateResult {
    pub prime: u64,
    pub conductor_exponent: u32,
    pub kodaira: Kodaira,
    /// Discriminant valuation of the minimal model.
    pub min_disc_valuation: u32,
    /// Model minimal at the prime.
    pub minimal_model: IntModel,
}

fn v(x: &BigInt, p: u64) -> u32 {
    if x.is_zero() {
        u32::MAX
    } else {
        val_big(x, p)
    }
}

fn md(x: &BigInt, p: u64) -> BigInt {
    x.mod_floor(&BigInt::from(p))
}

fn inv_p(x: &BigInt, p: u64) -> BigInt {
    let pb = BigInt::from(p);
    let x = md(x, p);
    x.modpow(&(&pb - 2), &pb)
}

/// Tate's algorithm at p for an integral model (p = 2, 3 included).
pub fn tate(model: &IntModel, p: u64) -> TateResult {
    let pb = BigInt::from(p);
    let mut c = model.clone();
    loop {
        let disc = c.disc();
        assert!(!disc.is_zero(), "singular model");
        let n = val_big(&disc, p);
        if n == 0 {
            return TateResult { prime: p, conductor_exponent: 0, kodaira: Kodaira::I0, min_disc_valuation: 0, minimal_model: c };
        }
        let e = c.to_curve();
        let [b2, b4, b6, _] = e.b_invariants().map(|x| x.to_integer());
        let c4 = e.c4().to_integer();
        let c6 = e.c6().to_integer();
        // move the singular point to (0,0)
        let (r, t) = if p == 2 {
            if v(&b2, 2) > 0 {
                let r = md(&c.a4, 2);
                let t = md(&(&r * (1 + &c.a2 + &c.a4) + &c.a6), 2);
                (r, t)
            } else {
                let r = md(&c.a3, 2);
                let t = md(&(&r + &c.a4), 2);
                (r, t)
            }
        } else if p == 3 {
            let r = if v(&b2, 3) > 0 { md(&-&b6, 3) } else { md(&-(&b2 * &b4), 3) };
            let t = md(&(&c.a1 * &r + &c.a3), 3);
            (r, t)
        } else {
            let r = if v(&c4, p) > 0 {
                md(&(-inv_p(&BigInt::from(12), p) * &b2), p)
            } else {
                md(&(-inv_p(&(12 * &c4), p) * (&c6 + &b2 * &c4)), p)
            };
            let t = md(&(-inv_p(&BigInt::from(2), p) * (&c.a1 * &r + &c.a3)), p);
            (r, t)
        };
        c = c.rst(&r, &BigInt::zero(), &t);
        let done = |c: IntModel, f: u32, k: Kodaira| TateResult {
            prime: p,
            conductor_exponent: f,
            kodaira: k,
            min_disc_valuation: n,
            minimal_model: c,
        };
        if v(&c4, p) == 0 {
            return done(c, 1, Kodaira::In(n));
        }
        let e = c.to_curve();
        let [_, _, b6, b8] = e.b_invariants().map(|x| x.to_integer());
        if v(&c.a6, p) < 2 {
            return done(c, n, Kodaira::II);
        }
        if v(&b8, p) < 3 {
            return done(c, n - 1, Kodaira::III);
        }
        if v(&b6, p) < 3 {
            return done(c, n - 2, Kodaira::IV);
        }
        // arrange p | a1, a2; p² | a3, a4; p³ | a6
        let (s, t) = if p == 2 {
            (md(&c.a2, 2), 2 * md(&(&c.a6 / 4), 2))
        } else {
            // p | a3, so a3 + 2t = −p·a3
            let half = BigInt::from((p + 1) / 2);
            (-&c.a1 * &half, -&c.a3 * &half)
        };
        c = c.rst(&BigInt::zero(), &s, &t);
        let p2 = &pb * &pb;
        let p3 = &p2 * &pb;
        let b = &c.a2 / &pb;
        let cc = &c.a4 / &p2;
        let d = &c.a6 / &p3;
        let w = 27 * &d * &d - &b * &b * &cc * &cc + 4 * &b * &b * &b * &d - 18 * &b * &cc * &d + 4 * &cc * &cc * &cc;
        let x = 3 * &cc - &b * &b;
        if v(&w, p) == 0 {
            return done(c, n - 4, Kodaira::I0Star);
        }
        if v(&x, p) == 0 {
            // double root: move it to T = 0
            let r0 = if p == 2 {
                md(&cc, 2)
            } else if p == 3 {
                md(&(&cc * &b), 3)
            } else {
                md(&((&b * &cc - 9 * &d) * inv_p(&(2 * &x), p)), p)
            };
            c = c.rst(&(&r0 * &pb), &BigInt::zero(), &BigInt::zero());
            let mut m = 1u32;
            let mut mx = p2.clone();
            let mut my = p2.clone();
            loop {
                let xa3 = &c.a3 / &my;
                let xa6 = &c.a6 / (&mx * &my);
                if v(&(&xa3 * &xa3 + 4 * &xa6), p) == 0 {
                    break;
                }
                let t1 = if p == 2 { &my * md(&xa6, 2) } else { &my * md(&(-&xa3 * BigInt::from((p + 1) / 2)), p) };
                c = c.rst(&BigInt::zero(), &BigInt::zero(), &t1);
                my = &my * &pb;
                m += 1;
                let xa2 = &c.a2 / &pb;
                let xa4 = &c.a4 / (&pb * &mx);
                let xa6 = &c.a6 / (&mx * &my);
                if v(&(&xa4 * &xa4 - 4 * &xa2 * &xa6), p) == 0 {
                    break;
                }
                let r1 = if p == 2 {
                    &mx * md(&(&xa6 * &xa2), 2)
                } else {
                    &mx * md(&(-&xa4 * inv_p(&(2 * &xa2), p)), p)
                };
                c = c.rst(&r1, &BigInt::zero(), &BigInt::zero());
                mx = &mx * &pb;
                m += 1;
            }
            return done(c, n - m - 4, Kodaira::InStar(m));
        }
        // triple root: move it to T = 0
        let r0 = if p == 2 {
            md(&b, 2)
        } else if p == 3 {
            md(&-&d, 3)
        } else {
            md(&(-&b * inv_p(&BigInt::from(3), p)), p)
        };
        c = c.rst(&(&r0 * &pb), &BigInt::zero(), &BigInt::zero());
        let p4 = &p2 * &p2;
        let x3 = &c.a3 / &p2;
        let x6 = &c.a6 / &p4;
        if v(&(&x3 * &x3 + 4 * &x6), p) == 0 {
            return done(c, n - 6, Kodaira::IVStar);
        }
        let t1 = if p == 2 { md(&x6, 2) } else { md(&(&x3 * BigInt::from((p + 1) / 2)), p) };
        c = c.rst(&BigInt::zero(), &BigInt::zero(), &(-&p2 * t1));
        if v(&c.a4, p) < 4 {
            return done(c, n - 7, Kodaira::IIIStar);
        }
        if v(&c.a6, p) < 6 {
            return done(c, n - 8, Kodaira::IIStar);
        }
        // non-minimal: scale by p
        c = IntModel {
            a1: &c.a1 / &pb,
            a2: &c.a2 / &p2,
            a3: &c.a3 / &p3,
            a4: &c.a4 / &p4,
            a6: &c.a6 / (&p4 * &p2),
        };
    }
}

/// Conductor exponent and Kodaira symbol at p.
pub fn tate_conductor_exponent(e: &EllipticCurveQ, p: u64) -> (u32, Kodaira) {
    let t = tate(&e.integral_model(), p);
    (t.conductor_exponent, t.kodaira)
}

/// The six rational rank-2 families with an infinite-order monodromy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Legendre,
    T27,
    T64,
    T432,
    E2p3,
    E3p3,
}

pub const ALL_FAMILIES: [Family; 6] = [Family::Legendre, Family::T27, Family::T64, Family::T432, Family::E2p3, Family::E3p3];

impl std::str::FromStr for Family {
    type Err = EllipticError;
    fn from_str(s: &str) -> Result<Self, EllipticError> {
        Ok(match s {
            "legendre" => Family::Legendre,
            "t27" => Family::T27,
            "t64" => Family::T64,
            "t432" => Family::T432,
            "e2p3" => Family::E2p3,
            "e3p3" => Family::E3p3,
            other => return Err(EllipticError::UnknownFamily(other.to_string())),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Legendre => "legendre",
            Family::T27 => "t27",
            Family::T64 => "t64",
            Family::T432 => "t432",
            Family::E2p3 => "e2p3",
            Family::E3p3 => "e3p3",
        };
        write!(f, "{}", s)
    }
}

fn r64(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn ipow(x: &Rat, e: u32) -> Rat {
    x.pow(e as i32)
}

impl Family {
    pub fn parameter(&self) -> HgmParameter {
        let one = r64(1, 1);
        match self {
            Family::Legendre => make_parameter(r64(1, 2), r64(1, 2), one, one),
            Family::T27 => make_parameter(r64(1, 3), r64(2, 3), one, one),
            Family::T64 => make_parameter(r64(1, 4), r64(3, 4), one, one),
            Family::T432 => make_parameter(r64(1, 6), r64(5, 6), one, one),
            Family::E2p3 => make_parameter(r64(1, 3), r64(2, 3), r64(1, 4), r64(3, 4)),
            Family::E3p3 => make_parameter(r64(1, 6), r64(5, 6), r64(1, 3), r64(2, 3)),
        }
    }

    /// Weierstrass model at t. Legendre uses y² = x³ + (t+1)x² + tx, the
    /// image of y² = x(x−1)(1−tx) under (x, y) ↦ (−tx, ty).
    pub fn model(&self, t: &Rat) -> Result<EllipticCurveQ, EllipticError> {
        let z = Rat::zero();
        let one = Rat::one();
        match self {
            Family::Legendre => EllipticCurveQ::new(z.clone(), t + &one, z.clone(), t.clone(), z),
            Family::T27 => EllipticCurveQ::new(one, z.clone(), t / q(27), z.clone(), z),
            Family::T64 => EllipticCurveQ::new(one, z.clone(), z.clone(), t / q(64), z),
            Family::T432 => EllipticCurveQ::new(one, z.clone(), z.clone(), z, -t / q(432)),
            Family::E2p3 => EllipticCurveQ::new(z.clone(), z.clone(), z, q(-12) * t, q(16) * t * t),
            Family::E3p3 => EllipticCurveQ::new(z.clone(), z.clone(), z, q(-3) * ipow(t, 3), ipow(t, 4) * (t + &one)),
        }
    }

    /// Discriminant of `model(t)` in closed form.
    pub fn disc_formula(&self, t: &Rat) -> Rat {
        let t1 = t - Rat::one();
        match self {
            Family::Legendre => q(16) * t * t * &t1 * &t1,
            Family::T27 => -ipow(t, 3) * &t1 / q(19683),
            Family::T64 => -(t * t) * &t1 / q(4096),
            Family::T432 => -(t * &t1) / q(432),
            Family::E2p3 => q(-110592) * ipow(t, 3) * &t1,
            Family::E3p3 => q(-432) * ipow(t, 8) * &t1 * &t1,
        }
    }

    /// Nominal closed form; differs from `disc_formula` for t64 by 2^24.
    pub fn nominal_disc_formula(&self, t: &Rat) -> Rat {
        match self {
            Family::T64 => -(q(4096) * t * t * (t - Rat::one())),
            other => other.disc_formula(t),
        }
    }

    pub fn j_formula(&self, t: &Rat) -> Rat {
        let t1 = t - Rat::one();
        match self {
            Family::Legendre => q(256) * ipow(&(t * t - t + Rat::one()), 3) / (t * t * &t1 * &t1),
            Family::T27 => q(27) * ipow(&(q(8) * t - q(9)), 3) / (ipow(t, 3) * &t1),
            Family::T64 => q(64) * ipow(&(q(3) * t - q(4)), 3) / (t * t * &t1),
            Family::T432 => q(-432) / (t * &t1),
            Family::E2p3 => q(-1728) / &t1,
            Family::E3p3 => q(-6912) * t / (&t1 * &t1),
        }
    }

    /// Exponents (of x, y, z) of the Fermat equation the Frey curve attaches to.
    pub fn fermat_exponents(&self, p: u32) -> [u32; 3] {
        match self {
            Family::Legendre => [p, p, p],
            Family::T27 | Family::T432 => [p, p, 3],
            Family::T64 => [p, p, 2],
            Family::E2p3 => [2, 3, p],
            Family::E3p3 => [3, 3, p],
        }
    }
}

/// Coefficients and putative solution (α, β, γ) of Ax^i + By^j = Cz^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreyInput {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub alpha: BigInt,
    pub beta: BigInt,
    pub gamma: BigInt,
}

impl FreyInput {
    pub fn from_ints(v: [i64; 6]) -> Self {
        let b = |x: i64| BigInt::from(x);
        FreyInput { a: b(v[0]), b: b(v[1]), c: b(v[2]), alpha: b(v[3]), beta: b(v[4]), gamma: b(v[5]) }
    }

    pub fn satisfies(&self, f: Family, p: u32) -> bool {
        let [i, j, k] = f.fermat_exponents(p);
        &self.a * self.alpha.pow(i) + &self.b * self.beta.pow(j) == &self.c * self.gamma.pow(k)
    }
}

/// The Frey curve of the family at a solution with varying exponent p.
pub fn frey_curve(f: Family, s: &FreyInput, p: u32) -> Result<EllipticCurveQ, EllipticError> {
    if !s.satisfies(f, p) {
        return Err(EllipticError::NotASolution);
    }
    let r = |x: BigInt| Rat::from_integer(x);
    let z = Rat::zero();
    let (a, b, c, al, be, ga) = (&s.a, &s.b, &s.c, &s.alpha, &s.beta, &s.gamma);
    match f {
        Family::Legendre => {
            // y² = x(x − Cγ^p)(x − Aα^p)
            let u = c * ga.pow(p);
            let w = a * al.pow(p);
            EllipticCurveQ::new(z.clone(), r(-(&u + &w)), z.clone(), r(&u * &w), z)
        }
        Family::T27 => EllipticCurveQ::new(r(3 * c * ga), z.clone(), r(a * al.pow(p) * c * c), z.clone(), z),
        Family::T64 => {
            let cq = r(c.clone());
            let aa = r(a * al.pow(p));
            let g2 = r(c * ga * ga);
            let a4 = q(108) * (q(3) * &aa - q(4) * &g2) / &cq;
            let a6 = -(q(432) * (q(9) * &aa - q(8) * &g2) * r(ga.clone()) / &cq);
            EllipticCurveQ::new(z.clone(), z.clone(), z, a4, a6)
        }
        Family::T432 => {
            let a4 = -27 * c.pow(4) * ga * ga;
            let a6 = -54 * (2 * a * al.pow(p) - c * ga.pow(3)) * c.pow(5);
            EllipticCurveQ::new(z.clone(), z.clone(), z, r(a4), r(a6))
        }
        Family::E2p3 => {
            let a4 = 12 * a * b.pow(3) * be;
            let a6 = 16 * a * a * b.pow(4) * al;
            EllipticCurveQ::new(z.clone(), z.clone(), z, r(a4), r(a6))
        }
        Family::E3p3 => {
            let a4 = 3 * a.pow(3) * b * al * be;
            let a6 = a.pow(4) * b * (b * be.pow(3) - a * al.pow(3));
            EllipticCurveQ::new(z.clone(), z.clone(), z, r(a4), r(a6))
        }
    }
}

/// Nominal discriminant of the Frey curve.
pub fn frey_disc_formula(f: Family, s: &FreyInput, p: u32) -> Rat {
    let r = |x: BigInt| Rat::from_integer(x);
    let (a, b, c, al, be, ga) = (&s.a, &s.b, &s.c, &s.alpha, &s.beta, &s.gamma);
    match f {
        Family::Legendre => r(16 * (a * b * c).pow(2) * (al * be * ga).pow(2 * p)),
        Family::T27 => r(27 * a.pow(3) * b * c.pow(8) * al.pow(3 * p) * be.pow(p)),
        Family::T64 => r(BigInt::from(2).pow(12) * BigInt::from(3).pow(12) * a * a * b * al.pow(2 * p) * be.pow(p)) / r(c.pow(3)),
        Family::T432 => r(BigInt::from(2).pow(8) * BigInt::from(3).pow(9) * a * b * c.pow(10) * al.pow(p) * be.pow(p)),
        Family::E2p3 => r(-110592 * a.pow(3) * b.pow(8) * c * ga.pow(p)),
        Family::E3p3 => r(-432 * a.pow(8) * b * b * c * c * ga.pow(2 * p)),
    }
}

/// Nominal j-invariant of the Frey curve (None for Legendre). For t27 and t64 it is not the j of `frey_curve`.
pub fn frey_j_formula(f: Family, s: &FreyInput, p: u32) -> Option<Rat> {
    let r = |x: BigInt| Rat::from_integer(x);
    let (a, b, c, al, be, ga) = (&s.a, &s.b, &s.c, &s.alpha, &s.beta, &s.gamma);
    Some(match f {
        Family::Legendre => return None,
        Family::T27 => r(19683 * c * ga.pow(3) * (8 * a * al.pow(p) - 9 * c * ga.pow(3))) / r(a.pow(3) * b * al.pow(3 * p) * be.pow(p)),
        Family::T64 => {
            let base: BigInt = 3 * a * al.pow(p) - 4 * c * ga * ga;
            r(64 * base.pow(3)) / r(a * a * b * al.pow(2 * p) * be.pow(p))
        }
        Family::T432 => r(432 * c * c * ga.pow(6)) / r(a * b * al.pow(p) * be.pow(p)),
        Family::E2p3 => r(1728 * b * be.pow(3)) / r(c * ga.pow(p)),
        Family::E3p3 => r(6912 * a * b * al.pow(3) * be.pow(3)) / r(c * c * ga.pow(2 * p)),
    })
}

/// Conductor exponent at 2 of the Legendre curve per the case table,
/// with a label naming the branch taken.
pub fn legendre_conductor2_branch(t0: &Rat) -> Result<(u32, &'static str), EllipticError> {
    if t0.is_zero() || t0.is_one() {
        return Err(EllipticError::DegeneratePoint);
    }
    let v2 = valuation(t0, 2);
    let two = Rat::from_integer(BigInt::from(2));
    let unit = if v2 >= 0 { t0 / two.pow(v2 as i32) } else { t0 * two.pow((-v2) as i32) };
    // odd rational ↦ residue mod 4
    let m4 = |x: &Rat| -> u64 {
        let n = mod_big(x.numer(), 4);
        let d = mod_big(x.denom(), 4);
        (n * d) % 4 // d odd, d^{-1} ≡ d mod 4
    };
    if v2 >= 0 {
        let r = m4(t0) % 4;
        let t_mod4 = if v2 == 0 { r } else if v2 == 1 { 2 } else { 0 };
        return Ok(match v2 {
            0 | 1 if t_mod4 == 2 || t_mod4 == 3 => (5, "v>=0, t≡2,3 mod 4"),
            0 => (4, "v>=0, t≡1 mod 4"),
            2 | 3 => (3, "v=2,3"),
            4 => (0, "v=4"),
            _ => (1, "v>=5"),
        });
    }
    let u = m4(&unit);
    Ok(if v2 % 2 != 0 {
        (6, "v<0 odd")
    } else if u == 3 {
        (4, "v<0 even, unit≡3 mod 4")
    } else if v2 == -2 {
        (3, "v=-2, unit≡1 mod 4")
    } else if v2 == -4 {
        (0, "v=-4, unit≡1 mod 4")
    } else {
        (1, "v<-4 even, unit≡1 mod 4")
    })
}

pub fn legendre_conductor2(t0: &Rat) -> Result<u32, EllipticError> {
    legendre_conductor2_branch(t0).map(|x| x.0)
}

/// All branch labels of the case table.
pub const LEGENDRE2_BRANCHES: [&str; 10] = [
    "v>=0, t≡2,3 mod 4",
    "v>=0, t≡1 mod 4",
    "v=2,3",
    "v=4",
    "v>=5",
    "v<0 odd",
    "v<0 even, unit≡3 mod 4",
    "v=-2, unit≡1 mod 4",
    "v=-4, unit≡1 mod 4",
    "v<-4 even, unit≡1 mod 4",
];

#[derive(Debug, Clone, Serialize)]
pub struct RationalRow {
    pub q: u64,
    /// q^{1−k/2}·H_q.
    pub trace: String,
    pub ap: i64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalHgmReport {
    pub family: Family,
    pub t0: String,
    pub epsilon: i64,
    /// Squarefree d of the quadratic twist character χ_d.
    pub twist: String,
    pub rows: Vec<RationalRow>,
    pub skipped: Vec<(u64, String)>,
    pub all_equal: bool,
}

/// Quadratic twist candidates: {±1, ±2, ±3, ±6} times products of the
/// squarefree kernels of t0, its denominator, t0 − 1 and `extra`.
pub(crate) fn twist_candidates(t0: &Rat, extra: &[BigInt]) -> Vec<BigInt> {
    let mut kernels = vec![BigInt::one()];
    let t1 = t0 - Rat::one();
    let sources: Vec<BigInt> = [t0.numer(), t0.denom(), t1.numer()].into_iter().cloned().chain(extra.iter().cloned()).collect();
    for x in sources {
        if !x.is_zero() {
            let k = squarefree_kernel(&x.abs());
            let kk = kernels.clone();
            for y in kk {
                let z = squarefree_kernel(&(&y * &k));
                if !kernels.contains(&z) {
                    kernels.push(z);
                }
            }
        }
    }
    let mut out: Vec<BigInt> = vec![];
    for base in [1i64, -1, 2, -2, 3, -3, 6, -6] {
        for k in &kernels {
            let d = squarefree_kernel(&(k * base));
            if !out.contains(&d) {
                out.push(d);
            }
        }
    }
    out.sort_by_key(|d| (d.abs(), d.is_negative()));
    out
}

/// First (d, ε) in candidate order with value = ε·χ_d(q)·reference on every row;
/// (+1, 1) when none fits.
pub(crate) fn fit_twist(rows: &[(u64, BigRational, i64)], candidates: &[BigInt]) -> (i64, BigInt) {
    let fits = |eps: i64, d: &BigInt| {
        rows.iter().all(|(q, tv, ap)| *tv == twisted(eps, d, *q, *ap))
    };
    for d in candidates {
        for eps in [1i64, -1] {
            if fits(eps, d) {
                return (eps, d.clone());
            }
        }
    }
    (1, BigInt::one())
}

pub(crate) fn twisted(eps: i64, d: &BigInt, q: u64, a: i64) -> BigRational {
    let chi = legendre(mod_big(d, q) as i64, q);
    BigRational::from_integer(BigInt::from(eps * chi * a))
}

/// Check q^{1−k/2} H_q = ε·χ_d(q)·a_q over good split primes, searching a
/// single (ε, d) for the whole run.
pub fn verify_rational_hgm(f: Family, t0: &Rat, primes: &[u64]) -> Result<RationalHgmReport, crate::hgm_core::HgmError> {
    let param = f.parameter();
    let curve = f.model(t0).map_err(|_| crate::hgm_core::HgmError::DegeneratePoint)?;
    let mut data: Vec<(u64, BigRational, i64)> = vec![];
    let mut skipped = vec![];
    for &q in primes {
        if q < 5 || (q - 1) % param.n != 0 {
            skipped.push((q, "not split".to_string()));
            continue;
        }
        let class = crate::hgm_core::classify_prime(&param, t0, q)?;
        if class != PrimeClass::Good {
            skipped.push((q, format!("bad prime: {}", class)));
            continue;
        }
        let ap = match curve.ap(q) {
            Ok(a) => a,
            Err(e) => {
                skipped.push((q, e.to_string()));
                continue;
            }
        };
        let ctx = build_ctx(q, &[param.n])?;
        let t = normalized_trace(&param, t0, &ctx)?;
        let tv = t.as_scalar().expect("rational family traces lie in Q");
        data.push((q, tv, ap));
    }
    let (eps, d) = fit_twist(&data, &twist_candidates(t0, &[]));
    let rows: Vec<RationalRow> = data
        .iter()
        .map(|(q, tv, ap)| RationalRow { q: *q, trace: tv.to_string(), ap: *ap, matches: *tv == twisted(eps, &d, *q, *ap) })
        .collect();
    let all_equal = !rows.is_empty() && rows.iter().all(|r| r.matches);
    Ok(RationalHgmReport { family: f, t0: t0.to_string(), epsilon: eps, twist: d.to_string(), rows, skipped, all_equal })
}

/// Helper for tests and reports: |a_p| ≤ 2√p.
pub fn hasse_ok(ap: i64, p: u64) -> bool {
    (ap * ap) as u64 <= 4 * p
}

/// Integer value of a rational known to be integral.
pub fn rat_to_i64(x: &Rat) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}
