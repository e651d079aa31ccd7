//! Scalar abstraction for the numerical layer.
//!
//! All spectral and dynamical code is generic over [`Scalar`] so the same
//! routines run at `f32` or `f64`. Concrete aliases for the common `f64`
//! instantiation live at the crate root.

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type usable for Hamiltonian spectra and propagators.
///
/// `nalgebra::RealField` supplies the transcendental functions and is what
/// the eigensolvers require; the num-traits bounds cover lossless-ish
/// conversions from the integer domain data (set sizes, counts).
pub trait Scalar: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Default {
    /// Conversion for counts and dimensions.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy view as `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_roundtrip() {
        assert_eq!(f64::from_count(12), 12.0);
        assert_eq!(f32::from_count(7), 7.0f32);
        assert_eq!(1.5f64.as_f64(), 1.5);
    }
}
