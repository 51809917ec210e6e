//! Real scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};

use faer::traits::RealField;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable for the whole stack (f32 or f64).
pub trait Real:
    RealField
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an f64 literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal out of range")
    }

    /// Converts a count or index.
    fn of(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count out of range")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// e^{i theta}
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn erf<T: Real>(x: T) -> T {
    T::lit(libm::erf(x.to_f64_lossy()))
}

pub fn erfc<T: Real>(x: T) -> T {
    T::lit(libm::erfc(x.to_f64_lossy()))
}
