//! Scalar abstraction shared by the geometry, trajectory and metric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts a literal or configuration value.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("every f64 converts to a float scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean in iteration order; `None` for an empty input.
pub(crate) fn mean<S: Scalar>(values: impl IntoIterator<Item = S>) -> Option<S> {
    let mut n = 0usize;
    let mut sum = S::zero();
    for v in values {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / S::of_usize(n))
}
