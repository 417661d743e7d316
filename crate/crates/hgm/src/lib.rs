//! Exact traces of Frobenius for rank-2 hypergeometric motives, with the
//! surrounding verification machinery: Euler curves, the S3 action,
//! congruences, elliptic families, hyperelliptic curves and an
//! elimination engine for generalized Fermat equations.

pub mod congruence;
pub mod cyclotomic;
pub mod elimination;
pub mod elliptic;
pub mod euler_curve;
pub mod ffext;
pub mod hgm_core;
pub mod hyperelliptic;
pub mod finite_char;
pub mod ntheory;
pub mod scalar;
pub mod transforms;

pub use cyclotomic::{Cyclotomic, Enclosure, PrimeIdealReduction};
pub use finite_char::{CharacterExponent, PrimeFieldCtx};
pub use scalar::Scalar;

/// Rationals used for specialization points and curve coefficients.
pub type Rat = num_rational::BigRational;

/// Element of Z[ζ_M].
pub type CyclotomicInteger = Cyclotomic<num_bigint::BigInt>;
/// Element of Q(ζ_M).
pub type CyclotomicRational = Cyclotomic<num_rational::BigRational>;
/// Element of Z[ζ_M] with machine coefficients.
pub type CyclotomicI64 = Cyclotomic<i64>;
/// Approximate element of C via double-precision coefficients.
pub type CyclotomicF64 = Cyclotomic<f64>;
/// Approximate element of C via single-precision coefficients.
pub type CyclotomicF32 = Cyclotomic<f32>;
/// Complex enclosure in double precision.
pub type Enclosure64 = Enclosure<f64>;
/// Complex enclosure in single precision.
pub type Enclosure32 = Enclosure<f32>;
