//! Scalar abstraction shared by every numerical module.
//!
//! All model math is written against [`Real`], so the same code runs in
//! `f32` and `f64`. The special functions the game needs (the Gaussian CDF)
//! are not part of `num_traits::Float`, so they live here.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + NumCast + Default + Debug + Display + Serialize + Send + Sync + 'static
{
    fn erf(self) -> Self;
    fn erfc(self) -> Self;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which never happens for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Standard normal CDF.
    #[inline]
    fn std_normal_cdf(self) -> Self {
        Self::lit(0.5) * (-self / Self::lit(std::f64::consts::SQRT_2)).erfc()
    }

    /// Standard normal density.
    #[inline]
    fn std_normal_pdf(self) -> Self {
        let inv_sqrt_2pi = Self::lit(0.398_942_280_401_432_7);
        inv_sqrt_2pi * (-(self * self) / Self::lit(2.0)).exp()
    }
}

impl Real for f64 {
    #[inline]
    fn erf(self) -> Self {
        libm::erf(self)
    }
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erf(self) -> Self {
        libm::erff(self)
    }
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Clamp to `[0, 1]`.
#[inline]
pub(crate) fn unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// `n` evenly spaced points covering `[lo, hi]`, endpoints exact.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = T::from_usize_lossy(n - 1);
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * T::from_usize_lossy(i) / last
                    }
                })
                .collect()
        }
    }
}
