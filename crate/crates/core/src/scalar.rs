//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate is generic over [`Real`], a floating-point scalar
//! that supports the dense linear algebra (nalgebra), the lattice FFTs
//! (rustfft), and the num-traits conversions used for tabulated constants.
//! `f32` and `f64` implement it; production accuracy targets assume `f64`.

use nalgebra::RealField;
use num_traits::FromPrimitive;
use rustfft::FftNum;

/// Floating-point scalar for all kernels: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + FftNum + std::iter::Sum + std::fmt::Display + std::fmt::LowerExp
{
    /// Conversion from an `f64` constant (exact for `f64`, rounded for `f32`).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Conversion from a lattice index or grid size.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("grid size representable in the scalar type")
    }

    /// Round-trip into `f64` for diagnostics and output formatting.
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
