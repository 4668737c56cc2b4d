//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the models and optimizers are generic over (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or sample.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Two-component vector (position, velocity, gradient).
pub type Vec2<T> = [T; 2];

/// Row-major 2x2 matrix; `m[i][j] = d(out_i)/d(in_j)`.
pub type Mat2<T> = [[T; 2]; 2];

#[inline]
pub(crate) fn dot<T: Real>(a: Vec2<T>, b: Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm<T: Real>(a: Vec2<T>) -> T {
    a[0].hypot(a[1])
}

/// `m^T v`
#[inline]
pub(crate) fn mat_t_vec<T: Real>(m: Mat2<T>, v: Vec2<T>) -> Vec2<T> {
    [m[0][0] * v[0] + m[1][0] * v[1], m[0][1] * v[0] + m[1][1] * v[1]]
}

/// C1 smoothstep `3t^2 - 2t^3` on [0, 1] and its derivative, clamped outside.
#[inline]
pub(crate) fn smoothstep<T: Real>(t: T) -> (T, T) {
    let zero = T::zero();
    let one = T::one();
    if t <= zero {
        (zero, zero)
    } else if t >= one {
        (one, zero)
    } else {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        (t * t * (three - two * t), six * t * (one - t))
    }
}
