//! Scalar abstraction for the numeric kernels: f32 or f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, SubAssign};

/// Floating-point scalar the flow and LP kernels are generic over.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + AddAssign + SubAssign + Sum + Debug + Display + 'static
{
    /// Lossless-enough conversion from f64 for tolerances and literals.
    fn from_f64_lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
