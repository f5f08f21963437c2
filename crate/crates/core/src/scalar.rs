//! Floating-point abstraction for probability and metric math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type for all probability, entropy, and metric computations.
/// Implemented for `f32` and `f64`; counts stay integral throughout, so the
/// scalar only enters when counts are turned into probabilities.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from a count. Counts in this crate stay far below
    /// 2^24, so even `f32` represents them exactly.
    fn cast_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable as scalar")
    }

    fn cast_u64(n: u64) -> Self {
        <Self as FromPrimitive>::from_u64(n).expect("count representable as scalar")
    }

    fn cast_f64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 representable as scalar")
    }

    /// `num / den` as a scalar ratio of counts.
    fn ratio(num: usize, den: usize) -> Self {
        Self::cast_usize(num) / Self::cast_usize(den)
    }

    fn half() -> Self {
        Self::cast_f64(0.5)
    }

    fn two() -> Self {
        Self::cast_f64(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_matches_division() {
        assert_eq!(f64::ratio(3, 4), 0.75);
        assert_eq!(f32::ratio(1, 2), 0.5f32);
        assert_eq!(f64::cast_u64(873), 873.0);
        assert_eq!(f64::half() + f64::half(), 1.0);
        assert_eq!(f32::two(), 2.0f32);
    }
}
