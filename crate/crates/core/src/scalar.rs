//! Real scalar abstraction for the numerical core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar the simulator is generic over.
///
/// The associated tolerances scale with the arithmetic: checks that hold to
/// `1e-12` in `f64` cannot be asked of `f32`.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Checks exact up to accumulated rounding: norm preservation,
    /// Hermiticity, grid alignment, shift truncation.
    const TOL_EXACT: Self;
    /// Probability bookkeeping across a composed pipeline.
    const TOL_BUDGET: Self;
    /// Normalization slack accepted for states fed into expectation values.
    const TOL_STATE_NORM: Self;

    /// Conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TOL_EXACT: Self = 1e-12;
    const TOL_BUDGET: Self = 1e-10;
    const TOL_STATE_NORM: Self = 1e-9;
}

impl Scalar for f32 {
    const TOL_EXACT: Self = 1e-4;
    const TOL_BUDGET: Self = 1e-3;
    const TOL_STATE_NORM: Self = 1e-3;
}
