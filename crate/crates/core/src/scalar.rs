//! Scalar abstraction shared by every numerical kernel.
//!
//! All physics code is written against [`Real`], which is satisfied by `f32`
//! and `f64`. The linear-algebra bound comes from `faer` so that the Schmidt
//! decomposition can run on the same scalar as the rest of the pipeline.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + faer::traits::RealField
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + faer::traits::RealField
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Lossy conversion back to `f64`, used for diagnostics and error messages.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Speed of light in vacuum, mm/fs.
pub const SPEED_OF_LIGHT_MM_PER_FS: f64 = 2.997_924_58e-4;

/// Speed of light in vacuum, nm/fs.
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

#[inline]
pub fn speed_of_light<T: Real>() -> T {
    lit::<T>(SPEED_OF_LIGHT_MM_PER_FS)
}

/// `sin(x)/x` with the removable singularity patched at the origin.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < lit::<T>(1e-4) {
        let x2 = x * x;
        T::one() - x2 / lit::<T>(6.0) + x2 * x2 / lit::<T>(120.0)
    } else {
        x.sin() / x
    }
}

/// Trapezoidal quadrature weight for node `index` of a uniform axis.
#[inline]
pub(crate) fn trapezoid_weight<T: Real>(index: usize, len: usize, step: T) -> T {
    if index == 0 || index + 1 == len {
        step / lit::<T>(2.0)
    } else {
        step
    }
}

/// Uniform axis `[-half_width, half_width]` with `points` nodes.
pub(crate) fn symmetric_axis<T: Real>(half_width: T, points: usize) -> (Vec<T>, T) {
    let step = lit::<T>(2.0) * half_width / lit::<T>((points - 1) as f64);
    let axis = (0..points)
        .map(|j| {
            // mirror the upper half so the axis is exactly antisymmetric
            let k = j.min(points - 1 - j);
            let v = -half_width + step * lit::<T>(k as f64);
            if j == k {
                v
            } else {
                -v
            }
        })
        .collect();
    (axis, step)
}
