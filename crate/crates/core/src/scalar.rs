//! Scalar traits.
//!
//! Polynomial families and the 2×2 comatrix algebra only need field
//! operations, so they are generic over [`Field`], which includes exact
//! rationals. Everything that solves, factorizes or integrates is generic
//! over [`Real`] (`f32`/`f64`).

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use nalgebra as na;
use num_rational::Rational64;
use num_traits::{Num, Zero};

/// Exact or floating scalar usable as a polynomial coefficient.
pub trait Field:
    na::Scalar
    + Copy
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
{
    /// Whether the value should be treated as zero: exactly zero for
    /// rationals, within a type-dependent absolute tolerance for floats.
    fn is_negligible(&self) -> bool;

    fn from_int(value: i64) -> Self;
}

/// Floating scalar for the numerical pipeline.
pub trait Real: Field + na::RealField {
    /// Converts an `f64` literal (tolerances, quadrature constants).
    fn lit(value: f64) -> Self {
        na::convert(value)
    }

    fn to_f64(self) -> f64 {
        na::try_convert(self).unwrap_or(f64::NAN)
    }

    fn machine_epsilon() -> Self {
        Self::default_epsilon()
    }
}

macro_rules! impl_float_field {
    ($t:ty, $tol:expr) => {
        impl Field for $t {
            fn is_negligible(&self) -> bool {
                self.abs() <= $tol
            }

            fn from_int(value: i64) -> Self {
                value as $t
            }
        }

        impl Real for $t {}
    };
}

impl_float_field!(f64, 1e-12);
impl_float_field!(f32, 1e-5);

impl Field for Rational64 {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_int(value: i64) -> Self {
        Rational64::from_integer(value)
    }
}
