//! Scalar abstraction so the whole library works at `f32` or `f64` precision.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};

/// Floating-point scalar the library is generic over.
///
/// The bound set covers everything the numerics need: ordinary float
/// arithmetic, math constants, conversion from literals, and the FFT
/// backend's requirements. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Signed
    + Sum<Self>
    + Debug
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` literal to the scalar type in use.
///
/// Panics only if the literal is not representable, which cannot happen for
/// the finite constants used in this crate.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite literal must be representable")
}
