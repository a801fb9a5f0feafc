//! Scalar abstraction: the numerics are generic over the floating-point type.
//!
//! Everything in this crate computes with a [`Real`] scalar, instantiated at
//! `f64` by the CLI and at `f32` where single precision is enough. The trait
//! carries the few constants that must be bit-exact per type (the scheme's
//! regime checks compare against `SQRT_2` directly).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// √2 with the exact bit pattern of this type's standard constant.
    const SQRT_2: Self;

    /// Lossless for `f64`; rounds to nearest for `f32`.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Real")
    }

    /// Widening (or identity) conversion used when reporting statistics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {
    const SQRT_2: Self = std::f32::consts::SQRT_2;
}

impl Real for f64 {
    const SQRT_2: Self = std::f64::consts::SQRT_2;
}

/// Shorthand for converting literal constants into the working scalar type.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::from_f64_lossy(v)
}
