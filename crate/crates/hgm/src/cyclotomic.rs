//! Exact arithmetic in Z[ζ_M] and Q(ζ_M) in the power basis.

use crate::ffext::{FfElem, FiniteField};
use crate::ntheory::{euler_phi, gcd, inv_mod, lcm, mult_order, prime_divisors};
use crate::scalar::Scalar;
use dashmap::DashMap;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycloError {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u64, u64),
    #[error("not in sublevel {target}: residual {residual}")]
    NotInSublevel { target: u64, residual: String },
    #[error("{0} is not a unit modulo {1}")]
    NotUnit(i64, u64),
    #[error("coefficient not representable in the target scalar type")]
    NotRepresentable,
    #[error("coefficient denominator divisible by the residue characteristic {0}")]
    DenominatorDivisible(u64),
}

/// Φ_M data, computed once per level.
#[derive(Debug)]
pub struct LevelData {
    pub level: u64,
    pub phi: usize,
    /// Monic Φ_M, low degree first, length phi + 1.
    pub poly: Vec<i64>,
}

static LEVELS: Lazy<DashMap<u64, Arc<LevelData>>> = Lazy::new(DashMap::new);

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // den monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![0i64; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                r[i + j] -= c * d;
            }
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// The M-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    assert!(m >= 1);
    // Φ_{pn}(x) = Φ_n(x^p)/Φ_n(x) for p ∤ n; Φ_m(x) = Φ_rad(x^{m/rad}).
    let ps = prime_divisors(m);
    let mut cur: Vec<i64> = vec![-1, 1];
    let mut n = 1u64;
    for &p in &ps {
        let mut sub = vec![0i64; (cur.len() - 1) * p as usize + 1];
        for (i, &c) in cur.iter().enumerate() {
            sub[i * p as usize] = c;
        }
        cur = poly_div_exact(&sub, &cur);
        n *= p;
    }
    let e = (m / n) as usize;
    if e > 1 {
        let mut sub = vec![0i64; (cur.len() - 1) * e + 1];
        for (i, &c) in cur.iter().enumerate() {
            sub[i * e] = c;
        }
        cur = sub;
    }
    cur
}

pub fn level_data(m: u64) -> Arc<LevelData> {
    if let Some(d) = LEVELS.get(&m) {
        return d.clone();
    }
    let poly = cyclotomic_poly(m);
    let data = Arc::new(LevelData { level: m, phi: poly.len() - 1, poly });
    LEVELS.entry(m).or_insert(data).clone()
}

/// Element of Q(ζ_M) with coefficients in `T`, power basis ζ_M^0..ζ_M^{φ(M)-1}.
#[derive(Clone, PartialEq)]
pub struct Cyclotomic<T> {
    level: u64,
    coeffs: Vec<T>,
}

impl<T: Scalar> fmt::Debug for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic(level={}, {:?})", self.level, self.coeffs)
    }
}

impl<T: Scalar> fmt::Display for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = c.to_rational();
            parts.push(if i == 0 { format!("{}", r) } else { format!("({})*z{}^{}", r, self.level, i) });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Fold exponents mod M and reduce modulo Φ_M; `v[i]` is the coefficient of ζ^i.
fn reduce_vec<T: Scalar>(data: &LevelData, mut v: Vec<T>) -> Vec<T> {
    let m = data.level as usize;
    if v.len() > m {
        let extra: Vec<T> = v.drain(m..).collect();
        for (i, c) in extra.into_iter().enumerate() {
            let j = (m + i) % m;
            let t = std::mem::replace(&mut v[j], T::zero());
            v[j] = t + c;
        }
    }
    let phi = data.phi;
    if v.len() < phi {
        v.resize(phi, T::zero());
    }
    for i in (phi..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut v[i], T::zero());
        for (j, &pc) in data.poly[..phi].iter().enumerate() {
            if pc != 0 {
                let k = i - phi + j;
                let t = std::mem::replace(&mut v[k], T::zero());
                v[k] = t - c.clone() * T::from_i64(pc);
            }
        }
    }
    v.truncate(phi);
    v
}

impl<T: Scalar> Cyclotomic<T> {
    pub fn zero(level: u64) -> Self {
        let phi = level_data(level).phi;
        Cyclotomic { level, coeffs: vec![T::zero(); phi] }
    }

    pub fn one(level: u64) -> Self {
        Self::from_scalar(level, T::one())
    }

    pub fn from_scalar(level: u64, c: T) -> Self {
        let mut z = Self::zero(level);
        z.coeffs[0] = c;
        z
    }

    pub fn from_int(level: u64, c: i64) -> Self {
        Self::from_scalar(level, T::from_i64(c))
    }

    /// ζ_M^k for any integer k.
    pub fn zeta_pow(level: u64, k: i64) -> Self {
        let e = k.rem_euclid(level as i64) as usize;
        let mut v = vec![T::zero(); e + 1];
        v[e] = T::one();
        Self::from_group_ring(level, v)
    }

    /// Element Σ v[i] ζ^i with arbitrary-length `v`.
    pub fn from_group_ring(level: u64, v: Vec<T>) -> Self {
        let data = level_data(level);
        Cyclotomic { level, coeffs: reduce_vec(&data, v) }
    }

    /// Power-basis coefficients; length must be φ(level).
    pub fn from_coeffs(level: u64, coeffs: Vec<T>) -> Result<Self, CycloError> {
        let phi = level_data(level).phi;
        if coeffs.len() != phi {
            return Err(CycloError::LevelMismatch(coeffs.len() as u64, phi as u64));
        }
        Ok(Cyclotomic { level, coeffs })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The value as a scalar if it lies in Q.
    pub fn as_scalar(&self) -> Option<T> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check(&self, o: &Self) -> Result<(), CycloError> {
        if self.level != o.level {
            Err(CycloError::LevelMismatch(self.level, o.level))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, CycloError> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Cyclotomic { level: self.level, coeffs })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, CycloError> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Cyclotomic { level: self.level, coeffs })
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, CycloError> {
        self.check(o)?;
        let n = self.coeffs.len();
        let mut v = vec![T::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = std::mem::replace(&mut v[i + j], T::zero());
                v[i + j] = t + a.clone() * b.clone();
            }
        }
        Ok(Self::from_group_ring(self.level, v))
    }

    pub fn neg(&self) -> Self {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Image under ζ_M ↦ ζ_M^r.
    pub fn galois_apply(&self, r: i64) -> Result<Self, CycloError> {
        let m = self.level as i64;
        if gcd(r.rem_euclid(m) as u64, self.level) != 1 {
            return Err(CycloError::NotUnit(r, self.level));
        }
        let mut v = vec![T::zero(); self.level as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = ((i as i64) * r).rem_euclid(m) as usize;
            let t = std::mem::replace(&mut v[k], T::zero());
            v[k] = t + c.clone();
        }
        Ok(Self::from_group_ring(self.level, v))
    }

    /// Complex conjugate (ζ ↦ ζ^{-1}).
    pub fn conj(&self) -> Self {
        self.galois_apply(-1).expect("-1 is a unit")
    }

    /// Same element at a multiple of the level.
    pub fn lift(&self, new_level: u64) -> Result<Self, CycloError> {
        if new_level % self.level != 0 {
            return Err(CycloError::LevelMismatch(self.level, new_level));
        }
        let step = (new_level / self.level) as usize;
        let mut v = vec![T::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * step] = c.clone();
        }
        Ok(Self::from_group_ring(new_level, v))
    }

    /// Same element at level `new_level`; lifts or descends as needed.
    pub fn change_level(&self, new_level: u64) -> Result<Self, CycloError> {
        if new_level == self.level {
            return Ok(self.clone());
        }
        if new_level % self.level == 0 {
            return self.lift(new_level);
        }
        let top = lcm(self.level, new_level);
        let up = self.lift(top)?;
        up.descend(new_level)
    }

    fn descend(&self, target: u64) -> Result<Self, CycloError> {
        let dd = descent_data(self.level, target);
        let x: Vec<BigRational> = self.coeffs.iter().map(|c| c.to_rational()).collect();
        let mut y = vec![BigRational::zero(); dd.phi_small];
        for (i, row) in dd.inverse.iter().enumerate() {
            let mut s = BigRational::zero();
            for (j, &r) in dd.pivots.iter().enumerate() {
                if !row[j].is_zero() && !x[r].is_zero() {
                    s += &row[j] * &x[r];
                }
            }
            y[i] = s;
        }
        let small = Cyclotomic::<BigRational> { level: target, coeffs: y };
        let back = small.lift(self.level)?;
        let residual: Vec<BigRational> = back.coeffs.iter().zip(&x).map(|(a, b)| b - a).collect();
        if !T::EXACT {
            let conv: Option<Vec<T>> = small.coeffs.iter().map(T::from_rational).collect();
            return conv.map(|c| Cyclotomic { level: target, coeffs: c }).ok_or(CycloError::NotRepresentable);
        }
        if residual.iter().any(|r| !r.is_zero()) {
            let res = Cyclotomic::<BigRational> { level: self.level, coeffs: residual };
            return Err(CycloError::NotInSublevel { target, residual: res.to_string() });
        }
        let conv: Option<Vec<T>> = small.coeffs.iter().map(T::from_rational).collect();
        conv.map(|c| Cyclotomic { level: target, coeffs: c }).ok_or(CycloError::NotRepresentable)
    }

    /// Convert coefficients to another scalar type.
    pub fn convert<U: Scalar>(&self) -> Result<Cyclotomic<U>, CycloError> {
        let conv: Option<Vec<U>> = self.coeffs.iter().map(|c| U::from_rational(&c.to_rational())).collect();
        conv.map(|c| Cyclotomic { level: self.level, coeffs: c }).ok_or(CycloError::NotRepresentable)
    }

    pub fn to_rational(&self) -> Cyclotomic<BigRational> {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|c| c.to_rational()).collect() }
    }

    /// Product of all Galois conjugates, as an element of Q.
    pub fn norm(&self) -> BigRational {
        let x = self.to_rational();
        let mut acc = Cyclotomic::<BigRational>::one(self.level);
        for r in 1..self.level.max(2) {
            if gcd(r, self.level) == 1 {
                acc = &acc * &x.galois_apply(r as i64).expect("unit");
            }
        }
        if self.level == 1 {
            acc = x;
        }
        acc.as_scalar().expect("norm is rational")
    }

    /// Enclosure of the image under ζ_M ↦ exp(2πik/M).
    pub fn embed_complex<F: Float + FloatConst>(&self, k: i64) -> Result<Enclosure<F>, CycloError> {
        let m = self.level as i64;
        if gcd(k.rem_euclid(m) as u64, self.level) != 1 {
            return Err(CycloError::NotUnit(k, self.level));
        }
        let eps = F::epsilon();
        let mut re = F::zero();
        let mut im = F::zero();
        let mut mass = F::zero();
        let n = F::from(self.coeffs.len()).unwrap();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = ((i as i64) * k).rem_euclid(m);
            let ang = F::TAU() * F::from(e).unwrap() / F::from(m).unwrap();
            let cf = F::from(c.to_f64()).unwrap();
            re = re + cf * ang.cos();
            im = im + cf * ang.sin();
            mass = mass + F::from(c.abs_f64()).unwrap();
        }
        // per-term: angle rounding (≤ 4 eps · 2π), cos/sin (≤ 2 eps), coefficient (≤ eps); summation ≤ n eps.
        let per = F::from(40.0).unwrap() * eps;
        let rad = mass * (per + n * eps) + F::min_positive_value();
        Ok(Enclosure { re, im, rad })
    }
}

impl<'a, T: Scalar> std::ops::Add for &'a Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    /// Panics on level mismatch; use `checked_add` to handle it.
    fn add(self, o: Self) -> Cyclotomic<T> {
        self.checked_add(o).expect("cyclotomic level mismatch")
    }
}

impl<'a, T: Scalar> std::ops::Sub for &'a Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn sub(self, o: Self) -> Cyclotomic<T> {
        self.checked_sub(o).expect("cyclotomic level mismatch")
    }
}

impl<'a, T: Scalar> std::ops::Mul for &'a Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn mul(self, o: Self) -> Cyclotomic<T> {
        self.checked_mul(o).expect("cyclotomic level mismatch")
    }
}

impl Cyclotomic<BigRational> {
    /// Multiplicative inverse (nonzero), via the product of the other conjugates.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut acc = Self::one(self.level);
        for r in 2..self.level {
            if gcd(r, self.level) == 1 {
                acc = &acc * &self.galois_apply(r as i64).ok()?;
            }
        }
        let n = (&acc * self).as_scalar()?;
        Some(acc.scale(&n.recip()))
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn to_integer(&self) -> Option<Cyclotomic<BigInt>> {
        self.convert().ok()
    }
}

struct DescentData {
    phi_small: usize,
    pivots: Vec<usize>,
    /// inverse[i][j]: coefficient of x[pivots[j]] in y[i].
    inverse: Vec<Vec<BigRational>>,
}

static DESCENT: Lazy<DashMap<(u64, u64), Arc<DescentData>>> = Lazy::new(DashMap::new);

fn descent_data(big: u64, small: u64) -> Arc<DescentData> {
    if let Some(d) = DESCENT.get(&(big, small)) {
        return d.clone();
    }
    assert!(big % small == 0, "descent needs small | big");
    let ps = level_data(small).phi;
    let pb = level_data(big).phi;
    // columns: images of ζ_small^j at level big
    let cols: Vec<Vec<BigRational>> = (0..ps)
        .map(|j| {
            Cyclotomic::<BigRational>::zeta_pow(small, j as i64)
                .lift(big)
                .expect("divides")
                .coeffs
        })
        .collect();
    // row-reduce the transpose to pick pivot rows greedily
    let mut pivots = Vec::new();
    let mut basis: Vec<Vec<BigRational>> = Vec::new(); // echelon rows in R^ps
    let mut lead: Vec<usize> = Vec::new();
    for r in 0..pb {
        let mut row: Vec<BigRational> = (0..ps).map(|j| cols[j][r].clone()).collect();
        for (b, &l) in basis.iter().zip(&lead) {
            if !row[l].is_zero() {
                let f = &row[l] / &b[l];
                for k in 0..ps {
                    if !b[k].is_zero() {
                        row[k] = &row[k] - &f * &b[k];
                    }
                }
            }
        }
        if let Some(l) = row.iter().position(|c| !c.is_zero()) {
            basis.push(row);
            lead.push(l);
            pivots.push(r);
            if pivots.len() == ps {
                break;
            }
        }
    }
    assert_eq!(pivots.len(), ps, "sublevel basis has full rank");
    // square matrix S[r][j] = cols[j][pivots[r]]; we need S^{-1}
    let mut aug: Vec<Vec<BigRational>> = pivots
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut row: Vec<BigRational> = (0..ps).map(|j| cols[j][r].clone()).collect();
            row.extend((0..ps).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..ps {
        let p = (c..ps).find(|&r| !aug[r][c].is_zero()).expect("invertible");
        aug.swap(c, p);
        let inv = aug[c][c].recip();
        for k in 0..2 * ps {
            aug[c][k] = &aug[c][k] * &inv;
        }
        for r in 0..ps {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c].clone();
                for k in 0..2 * ps {
                    let t = &f * &aug[c][k];
                    aug[r][k] = &aug[r][k] - &t;
                }
            }
        }
    }
    // S y = x_piv  =>  y = S^{-1} x_piv
    let inverse: Vec<Vec<BigRational>> = (0..ps).map(|i| aug[i][ps..].to_vec()).collect();
    let data = Arc::new(DescentData { phi_small: ps, pivots, inverse });
    DESCENT.entry((big, small)).or_insert(data).clone()
}

/// Complex disc: center (re, im) and radius covering rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure<F> {
    pub re: F,
    pub im: F,
    pub rad: F,
}

impl<F: Float> Enclosure<F> {
    pub fn contains(&self, re: F, im: F) -> bool {
        ((self.re - re).powi(2) + (self.im - im).powi(2)).sqrt() <= self.rad
    }
    /// Upper bound for the absolute value.
    pub fn abs_upper(&self) -> F {
        self.re.hypot(self.im) + self.rad
    }
    pub fn abs_lower(&self) -> F {
        (self.re.hypot(self.im) - self.rad).max(F::zero())
    }
}

fn scalar_to_json<T: Scalar>(c: &T) -> serde_json::Value {
    let r = c.to_rational();
    if r.is_integer() {
        let n = r.to_integer();
        if n.abs() < BigInt::from(1i64 << 53) {
            return serde_json::Value::from(n.to_i64().unwrap());
        }
        return serde_json::Value::String(n.to_string());
    }
    serde_json::Value::String(format!("{}/{}", r.numer(), r.denom()))
}

/// Parse an integer or rational coefficient from JSON.
pub fn scalar_from_json<T: Scalar>(v: &serde_json::Value) -> Result<T, String> {
    let r: BigRational = match v {
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => BigRational::from_integer(BigInt::from(i)),
            None => return Err(format!("coefficient {} is not an integer", n)),
        },
        serde_json::Value::String(s) => parse_rational(s).ok_or_else(|| format!("bad coefficient string {:?}", s))?,
        other => return Err(format!("bad coefficient {}", other)),
    };
    T::from_rational(&r).ok_or_else(|| format!("coefficient {} not representable", r))
}

/// Parse "n" or "n/d".
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

impl<T: Scalar> Serialize for Cyclotomic<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coeffs: Vec<serde_json::Value> = self.coeffs.iter().map(scalar_to_json).collect();
        let mut st = s.serialize_struct("Cyclotomic", 2)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Cyclotomic<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            level: u64,
            coeffs: Vec<serde_json::Value>,
        }
        let raw = Raw::deserialize(d)?;
        if raw.level == 0 {
            return Err(D::Error::custom("level must be positive"));
        }
        let coeffs: Result<Vec<T>, String> = raw.coeffs.iter().map(scalar_from_json).collect();
        let coeffs = coeffs.map_err(D::Error::custom)?;
        Cyclotomic::from_coeffs(raw.level, coeffs).map_err(|_| D::Error::custom("coeffs length must equal phi(level)"))
    }
}

/// Ring map Z[ζ_M] → F_{p^f} with ζ_{p^v} ↦ 1.
#[derive(Debug, Clone)]
pub struct PrimeIdealReduction {
    pub level: u64,
    pub p: u64,
    pub f: u32,
    pub field: FiniteField,
    /// Pinned root of Φ_{M'} (M' = prime-to-p part of M).
    pub root: FfElem,
    /// Image of ζ_M.
    pub zeta_image: FfElem,
}

impl PrimeIdealReduction {
    pub fn new(level: u64, p: u64) -> Self {
        let mut mp = level;
        let mut pv = 1u64;
        while mp % p == 0 {
            mp /= p;
            pv *= p;
        }
        let f = mult_order(p % mp.max(1), mp) as u32;
        let field = FiniteField::new(p, f.max(1));
        let root = field.pinned_primitive_root_of_unity(mp);
        // ζ_M = ζ_M^{s p^v} · (p-part), s = (p^v)^{-1} mod M'
        let s = if mp == 1 { 0 } else { inv_mod((pv % mp) as i64, mp as i64).expect("coprime") as u64 };
        let zeta_image = field.pow(&root, s);
        PrimeIdealReduction { level, p, f: f.max(1), field, root, zeta_image }
    }

    pub fn reduce<T: Scalar>(&self, x: &Cyclotomic<T>) -> Result<FfElem, CycloError> {
        if x.level != self.level {
            return Err(CycloError::LevelMismatch(x.level, self.level));
        }
        let pb = BigInt::from(self.p);
        let mut acc = self.field.zero();
        let mut pw = self.field.one();
        for c in &x.coeffs {
            let r = c.to_rational();
            let d = r.denom().clone() % &pb;
            if d.is_zero() {
                return Err(CycloError::DenominatorDivisible(self.p));
            }
            let n = crate::ntheory::mod_big(r.numer(), self.p);
            let dinv = inv_mod(crate::ntheory::mod_big(r.denom(), self.p) as i64, self.p as i64).unwrap() as u64;
            let cv = crate::ntheory::mul_mod(n, dinv, self.p);
            let term = self.field.scale(&pw, cv);
            acc = self.field.add(&acc, &term);
            pw = self.field.mul(&pw, &self.zeta_image);
        }
        Ok(acc)
    }
}

/// Convenience: φ(M) as usize.
pub fn phi(m: u64) -> usize {
    euler_phi(m) as usize
}
