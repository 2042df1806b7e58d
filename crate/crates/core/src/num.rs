//! Scalar abstraction.
//!
//! Every numeric routine in this crate is generic over [`Real`], so the whole
//! pipeline runs in either `f32` or `f64`. Concrete `f64` aliases for the
//! main data structures live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`; the blanket impl picks up anything with
/// the right numeric traits.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant must convert into the scalar type")
    }

    /// Converts a count into the scalar type.
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count must convert into the scalar type")
    }

    /// Converts a 64-bit count into the scalar type.
    fn of_u64(v: u64) -> Self {
        Self::from_u64(v).expect("count must convert into the scalar type")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
}

/// Clamps a correlation to `[-1, 1]`, absorbing last-bit rounding overshoot.
pub(crate) fn clamp_unit<R: Real>(r: R) -> R {
    r.min(R::one()).max(-R::one())
}
