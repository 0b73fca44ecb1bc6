//! Scalar abstraction shared by the numerical modules.
//!
//! Learners, fairness metrics and ranking statistics are written against
//! [`Real`] so they run in `f32` or `f64`. Rank aggregation only needs field
//! arithmetic and is bounded by [`RankValue`], which also admits exact
//! rationals such as `num_rational::Ratio<i64>`.

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used throughout the learners and metrics.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
}

/// Value type for averaged ranks. Needs exact division by a count.
pub trait RankValue: Num + FromPrimitive + Copy + PartialOrd + Debug {}

impl<T: Num + FromPrimitive + Copy + PartialOrd + Debug> RankValue for T {}

/// Ratio of two counts, `num / den`, in `T`.
#[inline]
pub(crate) fn ratio<T: Real>(num: usize, den: usize) -> T {
    T::count(num) / T::count(den)
}
