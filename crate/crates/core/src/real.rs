//! Scalar abstraction.
//!
//! Every numerical routine in the crate is written against [`Real`], which is
//! implemented for `f32` and `f64`. Tolerances quoted in the docs assume
//! `f64`; with `f32` they are clamped from below by a multiple of the
//! machine epsilon (see [`Real::tol`]).

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + rustfft::FftNum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance of `x`, never tighter than what the type can resolve.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(128.0);
        Self::lit(x).max(floor)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
