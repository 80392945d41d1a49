//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real field the numerics are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

/// Unit complex number `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_tau<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let mut t = theta % tau;
    if t < T::zero() {
        t = t + tau;
    }
    if t >= tau {
        t = t - tau;
    }
    t
}

/// Reduces an angle into `(-π, π]`.
pub fn wrap_pi<T: Real>(theta: T) -> T {
    let t = wrap_tau(theta);
    if t > T::PI() {
        t - T::TAU()
    } else {
        t
    }
}

/// Distance from `p` to the segment `[s0, s1]`.
pub fn segment_distance<T: Real>(p: Complex<T>, s0: Complex<T>, s1: Complex<T>) -> T {
    let d = s1 - s0;
    let len2 = d.norm_sqr();
    if len2 == T::zero() {
        return (p - s0).norm();
    }
    let t = ((p - s0) * d.conj()).re / len2;
    let t = t.max(T::zero()).min(T::one());
    (p - (s0 + d * t)).norm()
}

/// One-sided Hausdorff distance from the points of `from` to the polyline `to`.
pub fn directed_hausdorff<T: Real>(from: &[Complex<T>], to: &[Complex<T>]) -> T {
    from.iter()
        .map(|&p| polyline_distance(p, to))
        .fold(T::zero(), T::max)
}

/// Distance from `p` to the polyline through `pts`.
pub fn polyline_distance<T: Real>(p: Complex<T>, pts: &[Complex<T>]) -> T {
    match pts.len() {
        0 => T::infinity(),
        1 => (p - pts[0]).norm(),
        _ => pts
            .windows(2)
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold(T::infinity(), T::min),
    }
}

/// Symmetric Hausdorff distance between two polylines (vertices against segments).
pub fn hausdorff<T: Real>(p: &[Complex<T>], q: &[Complex<T>]) -> T {
    directed_hausdorff(p, q).max(directed_hausdorff(q, p))
}
