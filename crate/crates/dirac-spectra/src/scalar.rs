use std::fmt::{Debug, Display};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Real scalar type the whole library is generic over.
///
/// Blanket-implemented for anything float-like, which in practice means
/// `f32` and `f64`. Complex arithmetic is `num_complex::Complex<T>` on top
/// of this.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Intended for constants that every float
    /// type can hold (tolerances, small integers), so a failed conversion
    /// is a programming error and panics.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// `(-1)^n` without round-tripping through `powi`.
    fn alt(n: i64) -> Self {
        if n & 1 == 0 {
            Self::one()
        } else {
            -Self::one()
        }
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
}
