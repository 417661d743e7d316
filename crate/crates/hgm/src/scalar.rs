//! Coefficient scalars for cyclotomic arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient ring for [`crate::Cyclotomic`].
///
/// Exact implementors (`i64`, `i128`, `BigInt`, `BigRational`) round-trip
/// through `to_rational`/`from_rational`; float implementors approximate.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> BigRational;
    /// `None` if `r` is not representable (e.g. a fraction for an integer type).
    fn from_rational(r: &BigRational) -> Option<Self>;
    /// |self| as f64, used for error radii.
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for i64 {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl Scalar for i128 {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        if r.is_integer() {
            r.to_integer().to_i128()
        } else {
            None
        }
    }
}

impl Scalar for BigInt {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        if r.is_integer() {
            Some(r.to_integer())
        } else {
            None
        }
    }
    fn abs_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        let n = ToPrimitive::to_f64(self.numer()).unwrap_or(f64::NAN);
        let d = ToPrimitive::to_f64(self.denom()).unwrap_or(f64::NAN);
        if n.is_finite() && d.is_finite() {
            n / d
        } else {
            ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
        }
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
    fn from_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn to_rational(&self) -> BigRational {
                BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
            }
            fn from_rational(r: &BigRational) -> Option<Self> {
                <$t as FromPrimitive>::from_f64(Scalar::to_f64(r))
            }
        }
    };
}
float_scalar!(f64);
float_scalar!(f32);
