//! Scalar abstraction shared by every numeric module.
//!
//! All geometry, planning and network code is written against [`Real`], so the
//! same pipeline can run in `f64` (the default used by the CLI and the file
//! formats) or `f32`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts to `f64` for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    if theta > -pi && theta <= pi {
        return theta;
    }
    let mut r = (theta + pi) % two_pi;
    if r < T::zero() {
        r = r + two_pi;
    }
    let r = r - pi;
    if r <= -pi {
        pi
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5 * PI - 2.0 * PI) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25_f32), 0.25_f32);
    }

    #[test]
    fn wrap_is_idempotent_over_a_sweep() {
        for k in -400..400 {
            let x = k as f64 * 0.037;
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI, "{x} -> {w}");
            assert_eq!(wrap_angle(w), w);
            let turns = (x - w) / (2.0 * PI);
            assert!((turns - turns.round()).abs() < 1e-9);
        }
    }
}
