//! Scalar abstraction: the real floating-point types the toolkit is generic
//! over, plus the complex alias built on top of them.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar type underlying all arithmetic (`f32` or `f64`).
///
/// The bound collects everything the algorithms need: IEEE float semantics,
/// mathematical constants, conversion from literals, compound assignment,
/// iterator summation, and thread safety for concurrent callers.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must be representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] base type.
pub type Cx<R> = num_complex::Complex<R>;

/// Zero complex value.
pub fn cx_zero<R: Real>() -> Cx<R> {
    Cx::new(R::zero(), R::zero())
}

/// Complex value from real and imaginary parts given as `f64` constants.
pub fn cx<R: Real>(re: f64, im: f64) -> Cx<R> {
    Cx::new(R::of(re), R::of(im))
}
