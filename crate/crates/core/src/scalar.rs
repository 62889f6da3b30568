//! Scalar traits the library is written against.
//!
//! Geometry, counting and optimisation are generic over [`Real`] (`f32` or
//! `f64`). Polynomial defining functions are additionally evaluated over any
//! [`Ring`], which covers exact rationals for membership arbitration and
//! truncated Taylor series for the graph-function derivatives.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, One, ToPrimitive, Zero};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Exact rational value of this float (every finite float is a dyadic rational).
    fn to_rational(self) -> Option<BigRational> {
        BigRational::from_float(self.to_f64()?)
    }

    /// Relative width of the band around the boundary inside which the
    /// floating-point membership test defers to exact arithmetic.
    fn arbitration_band() -> Self {
        let floor = lit::<Self>(1e-9);
        let scaled = Self::epsilon() * lit(1024.0);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Commutative ring with unit; enough to evaluate a polynomial.
pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> {}

/// Converts an `f64` constant into `F`.
#[inline]
pub fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant representable in target float")
}

/// Converts a count or index into `F`.
#[inline]
pub fn from_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("integer representable in target float")
}

/// `F` to `f64`, for reporting.
#[inline]
pub fn to_f64<F: Real>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exponent as a small nonnegative integer, if it is one.
pub fn as_small_integer<F: Real>(p: F) -> Option<u32> {
    if p.fract() == F::zero() && p >= F::zero() && p <= lit(1024.0) {
        p.to_u32()
    } else {
        None
    }
}

/// `|x|^p`, using integer powers when `p` is integral.
#[inline]
pub fn abs_pow<F: Real>(x: F, p: F) -> F {
    match as_small_integer(p) {
        Some(n) => x.abs().powi(n as i32),
        None => x.abs().powf(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_conversion_is_exact() {
        let r = 0.1f64.to_rational().unwrap();
        assert_ne!(r, BigRational::new(1.into(), 10.into()));
        assert_eq!(r.to_f64().unwrap(), 0.1);
        assert_eq!(0.5f32.to_rational().unwrap(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn band_depends_on_precision() {
        assert_eq!(f64::arbitration_band(), 1e-9);
        assert!(f32::arbitration_band() > 1e-5);
    }

    #[test]
    fn small_integer_detection() {
        assert_eq!(as_small_integer(4.0f64), Some(4));
        assert_eq!(as_small_integer(2.5f64), None);
        assert_eq!(abs_pow(-2.0f64, 3.0), 8.0);
    }
}
