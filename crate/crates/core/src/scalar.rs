//! Scalar abstraction for the numerical core.
//!
//! All math in this crate is generic over [`Real`], which is implemented by
//! `f32` and `f64`. The concrete `f64` aliases at the crate root are what the
//! CLI and most tests use; `f32` works wherever the tolerances of the caller
//! allow it.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every algorithm in this crate.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

impl<T> Real for T where T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable")
}

/// Lossy view of a scalar as `f64`, used for diagnostics and error payloads.
#[inline]
pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `true` when `x` is neither NaN nor infinite.
#[inline]
pub(crate) fn is_finite<T: Real>(x: T) -> bool {
    // NaN is the only value unordered against itself.
    x.partial_cmp(&x).is_some() && x.abs() != lit::<T>(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_round_trips() {
        assert_eq!(lit::<f64>(0.5), 0.5);
        assert_eq!(lit::<f32>(0.5), 0.5f32);
        assert_eq!(as_f64(2.25f32), 2.25);
    }

    #[test]
    fn finiteness_probe() {
        assert!(is_finite(1.0f64));
        assert!(!is_finite(f64::NAN));
        assert!(!is_finite(f64::INFINITY));
        assert!(!is_finite(-f32::INFINITY));
    }
}
