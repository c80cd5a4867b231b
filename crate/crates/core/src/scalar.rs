//! Floating point scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// floating point: f32 or f64
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `20 * log10(x)`, the amplitude-to-decibel map.
pub(crate) fn amp_to_db<T: Scalar>(x: T) -> T {
    T::lit(20.0) * x.log10()
}

/// Inverse of [`amp_to_db`].
pub(crate) fn db_to_amp<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(20.0))
}

/// `10 * log10(x)`, the power-ratio-to-decibel map.
pub(crate) fn pow_to_db<T: Scalar>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

pub(crate) fn db_to_pow<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}
