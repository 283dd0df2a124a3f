use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type the scoring and evaluation math is written against.
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion from a count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as float")
    }

    /// Conversion from an `f64` constant.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable as float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
