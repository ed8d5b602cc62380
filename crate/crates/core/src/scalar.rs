//! Scalar abstraction for the numerical kernels.

use std::fmt;
use std::iter::Sum;

/// Floating-point scalar the solvers are generic over.
///
/// `f32` and `f64` implement it.  The tolerances quoted in the operation
/// contracts assume `f64`; with `f32` the algorithms run unchanged but
/// reach correspondingly lower accuracy.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into the active scalar type.
///
/// Panics only if the target type cannot represent any finite `f64`,
/// which does not happen for the supported types.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}
