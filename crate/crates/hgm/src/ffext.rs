//! Finite fields F_{p^f} as F_p[x]/(m(x)); small p only.

use crate::ntheory::{is_prime, mul_mod, pow_mod, prime_divisors};
use serde::Serialize;

/// Coordinates in the basis 1, x, ..., x^{f-1}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FfElem(pub Vec<u64>);

#[derive(Debug, Clone)]
pub struct FiniteField {
    pub p: u64,
    pub f: u32,
    /// Monic irreducible modulus, low degree first, length f + 1.
    pub modulus: Vec<u64>,
}

fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(r, m, p)
}

fn poly_rem(mut r: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = pow_mod(m[dm], p - 2, p);
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let top = r.len() - 1;
        let c = mul_mod(r[top], lead_inv, p);
        if c != 0 {
            for (j, &mc) in m.iter().enumerate() {
                let k = top - dm + j;
                r[k] = (r[k] + p - mul_mod(c, mc, p)) % p;
            }
        }
        r.pop();
        trim(&mut r);
    }
    if r.is_empty() {
        r.push(0);
    }
    r
}

fn poly_gcd(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a, b);
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(a.clone(), &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base.to_vec(), m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

/// x^{p^k} mod m.
fn frob_power(m: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut x = poly_rem(vec![0, 1], m, p);
    for _ in 0..k {
        x = poly_powmod(&x, p, m, p);
    }
    x
}

/// Rabin's irreducibility test for monic `m` of degree f.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let f = (m.len() - 1) as u32;
    if f == 1 {
        return true;
    }
    let sub = |mut v: Vec<u64>| {
        v.resize(v.len().max(2), 0);
        v[1] = (v[1] + p - 1) % p;
        v
    };
    if frob_power(m, p, f) != poly_rem(vec![0, 1], m, p) {
        return false;
    }
    for r in prime_divisors(f as u64) {
        let g = poly_gcd(m.to_vec(), sub(frob_power(m, p, f / r as u32)), p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl FiniteField {
    /// F_{p^f} with the lexicographically first monic irreducible modulus.
    pub fn new(p: u64, f: u32) -> Self {
        assert!(is_prime(p), "characteristic must be prime");
        assert!(f >= 1);
        let total = p.checked_pow(f).expect("field size fits u64");
        for idx in 0..total {
            let mut m = vec![0u64; f as usize + 1];
            let mut t = idx;
            for c in m.iter_mut().take(f as usize) {
                *c = t % p;
                t /= p;
            }
            m[f as usize] = 1;
            if f > 1 && m[0] == 0 {
                continue;
            }
            if is_irreducible(&m, p) {
                return FiniteField { p, f, modulus: m };
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.f)
    }

    fn norm(&self, mut v: Vec<u64>) -> FfElem {
        v.resize(self.f as usize, 0);
        FfElem(v)
    }

    pub fn zero(&self) -> FfElem {
        FfElem(vec![0; self.f as usize])
    }

    pub fn one(&self) -> FfElem {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> FfElem {
        let mut z = self.zero();
        z.0[0] = v.rem_euclid(self.p as i64) as u64;
        z
    }

    /// The `idx`-th element in base-p digit order.
    pub fn element(&self, mut idx: u64) -> FfElem {
        let mut z = self.zero();
        for c in z.0.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        z
    }

    pub fn add(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.p).collect())
    }

    pub fn sub(&self, a: &FfElem, b: &FfElem) -> FfElem {
        FfElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.p - y) % self.p).collect())
    }

    pub fn scale(&self, a: &FfElem, c: u64) -> FfElem {
        FfElem(a.0.iter().map(|x| mul_mod(*x, c % self.p, self.p)).collect())
    }

    pub fn mul(&self, a: &FfElem, b: &FfElem) -> FfElem {
        self.norm(poly_mulmod(&a.0, &b.0, &self.modulus, self.p))
    }

    pub fn pow(&self, a: &FfElem, e: u64) -> FfElem {
        self.norm(poly_powmod(&a.0, e, &self.modulus, self.p))
    }

    pub fn is_zero(&self, a: &FfElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    fn has_order(&self, w: &FfElem, m: u64) -> bool {
        let one = self.one();
        self.pow(w, m) == one && prime_divisors(m).iter().all(|&r| self.pow(w, m / r) != one)
    }

    /// Among primitive m-th roots of unity, the one with the
    /// lexicographically smallest coordinate vector (m | p^f − 1).
    pub fn pinned_primitive_root_of_unity(&self, m: u64) -> FfElem {
        let q1 = self.order() - 1;
        assert!(m >= 1 && q1 % m == 0, "m must divide p^f - 1");
        if m == 1 {
            return self.one();
        }
        let w = (1..=q1)
            .map(|i| self.pow(&self.element(i), q1 / m))
            .find(|w| self.has_order(w, m))
            .expect("cyclic group has elements of every order dividing its size");
        (1..m)
            .filter(|k| crate::ntheory::gcd(*k, m) == 1)
            .map(|k| self.pow(&w, k))
            .min()
            .unwrap()
    }
}
