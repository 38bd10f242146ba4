//! Scalar abstractions shared by the operator algebra and the solvers.
//!
//! [`Scalar`] is the minimal ring-with-division needed for exact operator
//! algebra (gate conjugation, Kronecker products); it is satisfied by `f32`,
//! `f64` and exact rationals such as `Ratio<i64>`. [`Real`] adds the
//! floating-point operations required by propagation and optimization.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

pub trait Scalar: Clone + Num + Neg<Output = Self> + FromPrimitive + Debug + Send + Sync + 'static {
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer literal representable in scalar type")
    }

    /// Exact `num / den` for integer literals.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl<T> Scalar for T where T: Clone + Num + Neg<Output = T> + FromPrimitive + Debug + Send + Sync + 'static {}

pub trait Real: Scalar + Float + FloatConst + NumAssign + ToPrimitive + Display + LowerExp + Default {
    /// Converts an `f64` constant into this type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
