//! Floating-point abstraction shared by the analytic models.
//!
//! Closed-form routines (entropy, link budget, decoy bounds, eclipse geometry)
//! are written against [`Real`] so they can be evaluated in `f32` or `f64`.
//! The Monte Carlo engine and post-processing run in `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// floating point: f32 or f64
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
