use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by the regression, data and thresholding layers.
///
/// Implemented for `f32` and `f64`. Special functions (normal quantiles and
/// friends) are evaluated in `f64` and converted back.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Sentinel used for entries that no threshold may remove.
    #[inline]
    fn sentinel() -> Self {
        Self::infinity()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
