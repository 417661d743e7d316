//! Prime fields, the pinned order-N character ω, Gauss and Jacobi sums,
//! Jacobi motives and the twist characters θ_α, η_α.
//!
//! Convention: g is the least primitive root mod q, ϖ(x) = ζ_{q−1}^{L(x)}
//! with L the discrete log to base g, and ω = ϖ^{(q−1)/N}, so ζ_N is
//! identified with g^{(q−1)/N} mod q for every N | q−1 simultaneously.
//! In particular ϖ(−1) = −1.

use crate::cyclotomic::Cyclotomic;
use crate::ntheory::{is_prime, least_primitive_root, lcm, mod_big, mul_mod, pow_mod};
use crate::Rat;
use dashmap::DashMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("prime not split: {n} does not divide {q}-1")]
    NotSplit { q: u64, n: u64 },
    #[error("theta undefined at ramified prime {0}")]
    Ramified(u64),
    #[error("argument vanishes modulo {0}")]
    ZeroArgument(u64),
}

/// F_q with least primitive root, discrete logs and Gauss-sum memo.
#[derive(Debug)]
pub struct PrimeFieldCtx {
    q: u64,
    g: u64,
    dlog: Vec<u32>,
    exp: Vec<u32>,
    levels: Vec<u64>,
    gauss: DashMap<(u64, u64), Arc<Cyclotomic<i128>>>,
}

/// Exponent of ϖ, reduced to [0, q−2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CharacterExponent(pub u64);

impl PrimeFieldCtx {
    /// Tables for F_q; each requested N must divide q − 1.
    pub fn build(q: u64, needed_levels: &[u64]) -> Result<Self, CharError> {
        if q < 3 || !is_prime(q) || q > u32::MAX as u64 {
            return Err(CharError::NotOddPrime(q));
        }
        for &n in needed_levels {
            if n == 0 || (q - 1) % n != 0 {
                return Err(CharError::NotSplit { q, n });
            }
        }
        let g = least_primitive_root(q);
        let mut dlog = vec![u32::MAX; q as usize];
        let mut exp = vec![0u32; q as usize - 1];
        let mut x = 1u64;
        for e in 0..q - 1 {
            dlog[x as usize] = e as u32;
            exp[e as usize] = x as u32;
            x = x * g % q;
        }
        Ok(PrimeFieldCtx { q, g, dlog, exp, levels: needed_levels.to_vec(), gauss: DashMap::new() })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    /// L(x) for x ≠ 0 mod q.
    pub fn dlog(&self, x: u64) -> Option<u64> {
        let x = x % self.q;
        if x == 0 {
            None
        } else {
            Some(self.dlog[x as usize] as u64)
        }
    }

    pub fn dlog_unchecked(&self, x: u64) -> u64 {
        self.dlog[x as usize] as u64
    }

    pub fn exp(&self, e: u64) -> u64 {
        self.exp[(e % (self.q - 1)) as usize] as u64
    }

    /// The element of F_q identified with ζ_N.
    pub fn pinned_root(&self, n: u64) -> Result<u64, CharError> {
        self.check_level(n)?;
        Ok(pow_mod(self.g, (self.q - 1) / n, self.q))
    }

    pub fn check_level(&self, n: u64) -> Result<(), CharError> {
        if n == 0 || (self.q - 1) % n != 0 {
            Err(CharError::NotSplit { q: self.q, n })
        } else {
            Ok(())
        }
    }

    /// Reduction of a rational mod q; `None` when q divides the denominator.
    pub fn residue(&self, t: &BigRational) -> Option<u64> {
        let d = mod_big(t.denom(), self.q);
        if d == 0 {
            return None;
        }
        let n = mod_big(t.numer(), self.q);
        Some(mul_mod(n, pow_mod(d, self.q - 2, self.q), self.q))
    }

    /// k with ω_N(x) = ζ_N^k.
    pub fn omega_exponent(&self, n: u64, x: u64) -> Result<u64, CharError> {
        self.check_level(n)?;
        let l = self.dlog(x).ok_or(CharError::ZeroArgument(self.q))?;
        Ok(l % n)
    }

    pub fn omega(&self, n: u64, x: u64) -> Result<Cyclotomic<i64>, CharError> {
        let k = self.omega_exponent(n, x)?;
        Ok(Cyclotomic::zeta_pow(n, k as i64))
    }

    /// ϖ^m(−1) = (−1)^m.
    pub fn varpi_minus_one(&self, m: i64) -> i64 {
        if m.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// ϖ-exponent of the character of rational order r: r(q−1) mod (q−1).
    pub fn char_exponent(&self, r: Rational64) -> Result<CharacterExponent, CharError> {
        let d = *r.denom() as u64;
        self.check_level(d)?;
        let m = (*r.numer() as i128 * ((self.q - 1) / d) as i128).rem_euclid((self.q - 1) as i128);
        Ok(CharacterExponent(m as u64))
    }

    /// Level of the Gauss sums: q(q−1).
    pub fn gauss_level(&self) -> u64 {
        self.q * (self.q - 1)
    }

    /// g(ϖ^m) with ψ(x) = ζ_q^x, exact at level q(q−1); memoized.
    pub fn gauss_sum(&self, m: CharacterExponent) -> Arc<Cyclotomic<i128>> {
        self.gauss_sum_psi(m, 1)
    }

    /// Gauss sum for the additive character ψ_s(x) = ζ_q^{sx}.
    pub fn gauss_sum_psi(&self, m: CharacterExponent, s: u64) -> Arc<Cyclotomic<i128>> {
        let key = (m.0 % (self.q - 1), s % self.q);
        if let Some(v) = self.gauss.get(&key) {
            return v.clone();
        }
        let q = self.q;
        let lev = self.gauss_level();
        let mut v = vec![0i128; lev as usize];
        for x in 1..q {
            let e = ((q - 1) * (mul_mod(s, x, q)) + q * ((key.0 * self.dlog_unchecked(x)) % (q - 1))) % lev;
            v[e as usize] += 1;
        }
        let val = Arc::new(Cyclotomic::from_group_ring(lev, v));
        self.gauss.entry(key).or_insert(val).clone()
    }

    /// Σ_{x ≠ 0,1} ϖ^{m1}(x) ϖ^{m2}(1−x), exact at level q−1.
    pub fn jacobi_sum(&self, m1: CharacterExponent, m2: CharacterExponent) -> Cyclotomic<i64> {
        let n = self.q - 1;
        Cyclotomic::from_group_ring(n, self.jacobi_group(n, m1.0 as i64, m2.0 as i64))
    }

    /// Group-ring vector (length n) of Σ_{x≠0,1} ζ_n^{e1 L(x) + e2 L(1−x)}.
    pub fn jacobi_group(&self, n: u64, e1: i64, e2: i64) -> Vec<i64> {
        let e1 = e1.rem_euclid(n as i64) as u64;
        let e2 = e2.rem_euclid(n as i64) as u64;
        let mut v = vec![0i64; n as usize];
        for x in 2..self.q {
            let lx = self.dlog_unchecked(x);
            let l1 = self.dlog_unchecked(self.q + 1 - x);
            v[((e1 * lx + e2 * l1) % n) as usize] += 1;
        }
        v
    }

    /// Jacobi sum of ω^{e1}, ω^{e2} at level n (exponents in units of (q−1)/n).
    pub fn jacobi_level(&self, n: u64, e1: i64, e2: i64) -> Cyclotomic<i64> {
        Cyclotomic::from_group_ring(n, self.jacobi_group(n, e1, e2))
    }

    /// K with g(x)g(y) = K g(x+y), for ω-exponents at level n.
    fn pair_factor(&self, n: u64, x: i64, y: i64) -> Cyclotomic<BigRational> {
        let ni = n as i64;
        let (x, y) = (x.rem_euclid(ni), y.rem_euclid(ni));
        let s = (x + y) % ni;
        let unit = ((self.q - 1) / n) as i64;
        if x == 0 && y == 0 {
            Cyclotomic::from_int(n, -1)
        } else if s == 0 {
            // g(x)g(−x) = ϖ^x(−1) q and g(0) = −1
            Cyclotomic::from_int(n, -(self.q as i64) * self.varpi_minus_one(x * unit))
        } else {
            self.jacobi_level(n, x, y).convert().expect("integers")
        }
    }

    fn pair_factor_inverse(&self, n: u64, x: i64, y: i64) -> Cyclotomic<BigRational> {
        let ni = n as i64;
        let (x, y) = (x.rem_euclid(ni), y.rem_euclid(ni));
        let s = (x + y) % ni;
        if s == 0 || x == 0 || y == 0 {
            let k = self.pair_factor(n, x, y);
            let c = k.as_scalar().expect("rational pair factor");
            Cyclotomic::from_scalar(n, c.recip())
        } else {
            // |J|² = q, so J^{-1} = conj(J)/q
            let j: Cyclotomic<BigRational> = self.jacobi_level(n, -x, -y).convert().expect("integers");
            j.scale(&BigRational::new(BigInt::one(), BigInt::from(self.q)))
        }
    }

    /// (−1)^{r+s+1} g(a_1)…g(a_r) g(Σb − Σa) / (g(b_1)…g(b_s)), exact in Q(ζ_N).
    pub fn jacobi_motive(&self, a_list: &[Rational64], b_list: &[Rational64]) -> Result<Cyclotomic<BigRational>, CharError> {
        let n = a_list.iter().chain(b_list).fold(1u64, |acc, r| lcm(acc, *r.denom() as u64));
        self.check_level(n)?;
        let units = |r: &Rational64| (r.numer() * (n as i64 / r.denom())).rem_euclid(n as i64);
        let sa: i64 = a_list.iter().map(units).sum();
        let sb: i64 = b_list.iter().map(units).sum();
        let mut nums: Vec<i64> = a_list.iter().map(units).collect();
        nums.push((sb - sa).rem_euclid(n as i64));
        let dens: Vec<i64> = b_list.iter().map(units).collect();
        let mut val = Cyclotomic::<BigRational>::one(n);
        let mut acc = nums[0];
        for &x in &nums[1..] {
            val = &val * &self.pair_factor(n, acc, x);
            acc = (acc + x).rem_euclid(n as i64);
        }
        if dens.is_empty() {
            // leftover g(acc) with acc ≡ 0, and g(0) = −1
            debug_assert_eq!(acc, 0);
            val = val.neg();
        } else {
            let mut accd = dens[0];
            for &x in &dens[1..] {
                val = &val * &self.pair_factor_inverse(n, accd, x);
                accd = (accd + x).rem_euclid(n as i64);
            }
            debug_assert_eq!(acc, accd);
        }
        let sign = if (a_list.len() + b_list.len() + 1) % 2 == 0 { 1 } else { -1 };
        if sign < 0 {
            val = val.neg();
        }
        Ok(val)
    }

    /// ϖ(x)^{α(q−1)} as a root of unity at level den(α).
    pub fn character_power(&self, alpha: Rational64, x: u64) -> Result<Cyclotomic<i64>, CharError> {
        let d = *alpha.denom() as u64;
        self.check_level(d)?;
        let l = self.dlog(x).ok_or(CharError::ZeroArgument(self.q))? as i128;
        let e = (l * *alpha.numer() as i128).rem_euclid(d as i128);
        Ok(Cyclotomic::zeta_pow(d, e as i64))
    }

    /// θ_α(Frob_q) = χ_q(t0)^r for α = r/N.
    pub fn twist_theta(&self, alpha: Rational64, t0: &Rat) -> Result<Cyclotomic<i64>, CharError> {
        let x = self.residue(t0).ok_or(CharError::Ramified(self.q))?;
        if x == 0 {
            return Err(CharError::Ramified(self.q));
        }
        self.character_power(alpha, x)
    }

    /// η_α(Frob_q) = χ_q(1 − t0)^r.
    pub fn twist_eta(&self, alpha: Rational64, t0: &Rat) -> Result<Cyclotomic<i64>, CharError> {
        let one_minus = BigRational::one() - t0;
        if one_minus.is_zero() {
            return Err(CharError::Ramified(self.q));
        }
        self.twist_theta(alpha, &one_minus)
    }
}

/// Convenience: q odd prime, ctx with a single level.
pub fn build_ctx(q: u64, needed_levels: &[u64]) -> Result<PrimeFieldCtx, CharError> {
    PrimeFieldCtx::build(q, needed_levels)
}

/// Least common multiple of rational denominators.
pub fn level_of(rs: &[Rational64]) -> u64 {
    rs.iter().fold(1u64, |acc, r| acc.lcm(&(*r.denom() as u64)))
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn is<T: Send + Sync>() {}
    is::<PrimeFieldCtx>();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ctx_tables() {
        let c = build_ctx(11, &[5]).unwrap();
        assert_eq!(c.generator(), 2);
        assert_eq!(c.dlog(4), Some(2));
        assert_eq!(c.dlog(1), Some(0));
        assert_eq!(c.dlog(2), Some(1));
        assert!(matches!(build_ctx(11, &[3]), Err(CharError::NotSplit { .. })));
        assert_eq!(build_ctx(7, &[1]).unwrap().generator(), 3);
    }

    #[test]
    fn gauss_of_trivial_is_minus_one() {
        let c = build_ctx(13, &[]).unwrap();
        let g = c.gauss_sum(CharacterExponent(0));
        assert_eq!(*g, Cyclotomic::from_int(c.gauss_level(), -1));
    }

    #[test]
    fn jacobi_motive_cancellation() {
        let c = build_ctx(13, &[12]).unwrap();
        for k in 1..12 {
            let a = Rational64::new(k, 12);
            let v = c.jacobi_motive(&[a], &[a]).unwrap();
            assert_eq!(v.as_scalar(), Some(BigRational::one()));
        }
    }
}
