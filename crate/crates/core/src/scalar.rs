//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Tolerance used for unitarity, hermiticity and normalization checks.
    fn check_tol() -> Self;

    /// Default cutoff below which singular values count as zero.
    fn svd_cutoff() -> Self;
}

impl Real for f64 {
    fn check_tol() -> Self {
        1e-10
    }

    fn svd_cutoff() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn check_tol() -> Self {
        1e-4
    }

    fn svd_cutoff() -> Self {
        1e-5
    }
}

/// Complex amplitude over the real scalar `R`.
pub type C<R> = Complex<R>;

#[inline]
pub(crate) fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 is representable")
}

#[inline]
pub(crate) fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}

#[inline]
pub(crate) fn cis<R: Real>(theta: R) -> C<R> {
    C::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn czero<R: Real>() -> C<R> {
    C::new(R::zero(), R::zero())
}

#[inline]
pub(crate) fn cone<R: Real>() -> C<R> {
    C::new(R::one(), R::zero())
}

#[inline]
pub(crate) fn creal<R: Real>(x: R) -> C<R> {
    C::new(x, R::zero())
}

#[inline]
pub(crate) fn arg<R: Real>(z: C<R>) -> R {
    z.im.atan2(z.re)
}
