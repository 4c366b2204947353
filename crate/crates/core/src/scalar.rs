//! Scalar abstractions shared by the numeric modules.
//!
//! Loads are generic over [`LoadScalar`] so the same tallies can be read out as
//! exact rationals or as floats. Curves, Chernoff bounds and Monte Carlo
//! statistics are generic over [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Float, FloatConst, FromPrimitive, One, ToPrimitive, Zero};

pub trait Real: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub trait LoadScalar:
    Clone + PartialOrd + Debug + Zero + One + Add<Output = Self> + Mul<Output = Self> + Send + Sync
{
    fn from_ratio(num: u128, den: u128) -> Self;
    fn from_rational(r: &Rational64) -> Self;
    fn to_f64(&self) -> f64;
}

impl LoadScalar for BigRational {
    fn from_ratio(num: u128, den: u128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational64) -> Self {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl LoadScalar for f64 {
    fn from_ratio(num: u128, den: u128) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational64) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LoadScalar for f32 {
    fn from_ratio(num: u128, den: u128) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_rational(r: &Rational64) -> Self {
        (*r.numer() as f64 / *r.denom() as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

/// Converts an exact rational to a `Real`.
pub fn real_from_rational<F: Real>(r: &Rational64) -> F {
    F::lit(*r.numer() as f64) / F::lit(*r.denom() as f64)
}

pub fn big(r: &Rational64) -> BigRational {
    BigRational::from_rational(r)
}
