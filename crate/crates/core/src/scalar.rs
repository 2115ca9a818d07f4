//! Scalar abstraction shared by every kernel in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn from_count(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    /// `max(v, floor)` where `floor` is a multiple of machine epsilon.
    ///
    /// Used to turn f64-calibrated defaults into something meaningful for
    /// lower-precision types.
    #[inline]
    fn at_least_eps(v: f64, eps_multiple: f64) -> Self {
        let v = Self::lit(v);
        let floor = Self::epsilon() * Self::lit(eps_multiple);
        if v > floor {
            v
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn norm1<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub(crate) fn norm_inf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub(crate) fn sum<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum()
}

/// `‖a − b‖₁`.
pub(crate) fn dist1<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
}

pub(crate) fn all_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}
