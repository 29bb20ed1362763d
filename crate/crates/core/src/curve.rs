//! Small helpers for sampled 1-D curves.

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Index of the global maximum (first occurrence).
pub fn argmax<T: Real>(ys: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &y) in ys.iter().enumerate() {
        match best {
            Some(b) if ys[b] >= y => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Linear-interpolated abscissa where the curve crosses `level` when walking
/// outward from `peak` in direction `dir` (-1 or +1).
fn crossing<T: Real>(xs: &[T], ys: &[T], peak: usize, level: T, dir: isize) -> Option<T> {
    let mut i = peak as isize;
    loop {
        let j = i + dir;
        if j < 0 || j as usize >= ys.len() {
            return None;
        }
        let (a, b) = (i as usize, j as usize);
        if ys[b] < level {
            let t = (ys[a] - level) / (ys[a] - ys[b]);
            return Some(xs[a] + (xs[b] - xs[a]) * t);
        }
        i = j;
    }
}

/// Full width at `fraction` of the value at `peak`, by linear interpolation.
pub fn width_at<T: Real>(xs: &[T], ys: &[T], peak: usize, fraction: T) -> Result<T> {
    let level = ys[peak] * fraction;
    let left = crossing(xs, ys, peak, level, -1);
    let right = crossing(xs, ys, peak, level, 1);
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l).abs()),
        _ => Err(Error::Analysis(format!(
            "curve does not fall to {:.3} of its peak at x = {:.6e} before the sampled range ends",
            to_f64(fraction),
            to_f64(xs[peak])
        ))),
    }
}

pub fn fwhm<T: Real>(xs: &[T], ys: &[T], peak: usize) -> Result<T> {
    width_at(xs, ys, peak, T::one() / (T::one() + T::one()))
}
