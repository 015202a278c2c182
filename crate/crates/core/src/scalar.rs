//! Scalar abstraction shared by the phase-dynamics modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the oscillator dynamics can run in: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Round half to even.
    fn round_ties_even(self) -> Self {
        let r = self.round();
        let half = Self::lit(0.5);
        if (self - self.trunc()).abs() == half {
            let two = Self::lit(2.0);
            // `round` went away from zero; step back if that landed on an odd value.
            if (r / two).fract() != Self::zero() {
                return r - self.signum();
            }
        }
        r
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let w = phi % two_pi;
    let w = if w < T::zero() { w + two_pi } else { w };
    // `-tiny % 2π + 2π` can round up to exactly 2π.
    if w >= two_pi {
        T::zero()
    } else {
        w
    }
}
