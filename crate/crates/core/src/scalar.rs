//! Numeric traits the library is generic over.
//!
//! Continuous numerics (density tables, transforms, schedule evaluation)
//! run on any [`Scalar`], i.e. `f32` or `f64`. Schedule exponents and the
//! limit classifier run on any [`Exponent`], which additionally admits
//! exact rationals such as `Ratio<i64>` so that the equality tests in the
//! classification rules are exact.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating point type used by the numerical kernels.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an integer index.
    #[inline]
    fn from_u64_lossy(x: u64) -> Self {
        <Self as FromPrimitive>::from_u64(x).expect("integer representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Exponent / coefficient type of an iterated-log schedule.
///
/// Comparisons (`== 0`, `== 1`, `> 0`) are made exactly in this type.
pub trait Exponent:
    Num + Signed + PartialOrd + Clone + Debug + Display + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    /// Lossy conversion used when a schedule is evaluated numerically.
    #[inline]
    fn approx<T: Scalar>(&self) -> T {
        T::lit(self.to_f64().unwrap_or(f64::NAN))
    }
}

impl<E> Exponent for E where
    E: Num + Signed + PartialOrd + Clone + Debug + Display + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
}
