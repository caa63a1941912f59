//! Scalar abstraction shared by the model, the LP kernel and the search layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the solver can run on: `f32` or `f64`.
///
/// The tolerances are per type because a simplex pivot tolerance that is
/// sensible for `f64` is far below the resolution of `f32`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Primal feasibility tolerance used inside the simplex.
    fn primal_tol() -> Self;
    /// Reduced-cost tolerance used by pricing.
    fn dual_tol() -> Self;
    /// Smallest admissible pivot magnitude.
    fn pivot_tol() -> Self;
    /// Upper limit on the diagonal ratio of a fresh LU before the basis is
    /// declared numerically unusable.
    fn max_condition() -> Self;

    /// Lossy conversion from `f64`, used for constants and file input.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    #[inline]
    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize is representable in every Scalar")
    }
}

impl Scalar for f64 {
    fn primal_tol() -> Self {
        1e-9
    }
    fn dual_tol() -> Self {
        1e-9
    }
    fn pivot_tol() -> Self {
        1e-9
    }
    fn max_condition() -> Self {
        1e14
    }
}

impl Scalar for f32 {
    fn primal_tol() -> Self {
        1e-4
    }
    fn dual_tol() -> Self {
        1e-4
    }
    fn pivot_tol() -> Self {
        1e-5
    }
    fn max_condition() -> Self {
        1e6
    }
}

/// Absolute feasibility tolerance for reported solutions (MW / MWh).
pub const EPS_FEAS: f64 = 1e-6;
/// Relative objective tolerance for reported solutions.
pub const EPS_OBJ: f64 = 1e-6;

/// `|a - b| <= EPS_OBJ * max(1, |a|, |b|)`.
pub fn objective_close<S: Scalar>(a: S, b: S) -> bool {
    let (a, b) = (a.as_f64(), b.as_f64());
    (a - b).abs() <= EPS_OBJ * 1f64.max(a.abs()).max(b.abs())
}

/// Objective tolerance scaled to the magnitude of `value`.
pub fn objective_tol<S: Scalar>(value: S) -> S {
    S::of(EPS_OBJ) * S::one().max(value.abs())
}
