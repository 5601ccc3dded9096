//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the model is evaluated in: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded) in `f32`.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal must convert to scalar")
    }

    /// Lossy conversion of a count.
    #[inline]
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("count must convert to scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts a linear power ratio to decibels. Non-positive ratios map to `-inf`.
pub fn to_db<T: Scalar>(linear: T) -> T {
    if linear > T::zero() {
        T::lit(10.0) * linear.log10()
    } else {
        T::neg_infinity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversion() {
        assert_eq!(to_db(100.0_f64), 20.0);
        assert_eq!(to_db(1.0_f32), 0.0);
        assert_eq!(to_db(0.0_f64), f64::NEG_INFINITY);
    }
}
