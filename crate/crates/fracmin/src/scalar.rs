//! Floating-point abstraction for the numerical core.
//!
//! All quadrature, kernel and curvature code is generic over [`Scalar`];
//! `f64` is the production type (the documented tolerances assume it) and
//! `f32` is available for quick, low-precision experiments.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64` (exact for `f64`).
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Scalar")
    }

    /// Lossy conversion to `f64` (exact for `f64` and `f32`).
    fn f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f64::of(1.5).f64(), 1.5);
        assert_eq!(f32::of(0.25), 0.25f32);
    }
}
