//! Scalar rings shared by the numeric and polynomial code paths.

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, DMatrix};
use num_complex::Complex;
use num_traits::{One, Zero};
use std::ops::Neg;

pub type C64 = Complex<f64>;

/// Commutative ring of matrix entries. Implemented for complex numbers
/// (pointwise operators) and complex polynomials (holomorphic entries).
pub trait Ring:
    nalgebra::Scalar
    + Zero
    + One
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_int(n: i64) -> Self;
}

impl Ring for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl Ring for C64 {
    fn from_int(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
}

/// `sign` must be -1, 0 or +1.
pub(crate) fn signed<T: Ring>(sign: i32, value: &T) -> T {
    match sign {
        1 => value.clone(),
        -1 => -value.clone(),
        _ => T::zero(),
    }
}

pub(crate) fn scale_matrix<T: Ring>(m: &DMatrix<T>, factor: &T) -> DMatrix<T> {
    m.map(|x| x * factor.clone())
}

pub(crate) fn is_zero_matrix<T: Ring>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.is_zero())
}
