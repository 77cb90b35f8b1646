//! Level-1/level-2 kernels.
//!
//! Reductions accumulate strictly left to right. Every solver in the crate is
//! built on these, which is what makes their output reproducible bit for bit.

use super::matrix::{DenseMatrix, DenseVector};
use super::scalar::Scalar;
use crate::error::{check_len, Result};

#[inline]
pub(crate) fn dot_unchecked<T: Scalar>(u: &[T], v: &[T]) -> T {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = T::zero();
    for (&a, &b) in u.iter().zip(v) {
        acc = acc + a * b;
    }
    acc
}

#[inline]
pub(crate) fn axpy_sub_unchecked<T: Scalar>(e: &mut [T], col: &[T], da: T) {
    debug_assert_eq!(e.len(), col.len());
    for (ei, &ci) in e.iter_mut().zip(col) {
        *ei = *ei - da * ci;
    }
}

/// Inner product `Σ u_i v_i`.
pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    check_len("dot", u.len(), v.len())?;
    Ok(dot_unchecked(u, v))
}

/// `e ← e − da·col`, in place.
pub fn axpy_sub<T: Scalar>(e: &mut [T], col: &[T], da: T) -> Result<()> {
    check_len("axpy_sub", e.len(), col.len())?;
    axpy_sub_unchecked(e, col, da);
    Ok(())
}

/// Sum of squares `Σ e_i²` (not the root).
pub fn sum_squares<T: Scalar>(e: &[T]) -> T {
    dot_unchecked(e, e)
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(e: &[T]) -> T {
    sum_squares(e).sqrt()
}

/// `x·a`, accumulated one column at a time.
pub fn matvec<T: Scalar>(x: &DenseMatrix<T>, a: &[T]) -> Result<DenseVector<T>> {
    check_len("matvec coefficients", x.cols(), a.len())?;
    let mut out = DenseVector::zeros(x.rows());
    for (col, &aj) in x.columns().zip(a) {
        if aj != T::zero() {
            axpy_sub_unchecked(&mut out, col, -aj);
        }
    }
    Ok(out)
}

/// `y − x·a` recomputed from scratch.
pub fn residual<T: Scalar>(x: &DenseMatrix<T>, y: &[T], a: &[T]) -> Result<DenseVector<T>> {
    check_len("residual target", x.rows(), y.len())?;
    check_len("residual coefficients", x.cols(), a.len())?;
    let mut e = DenseVector::from_slice(y);
    for (col, &aj) in x.columns().zip(a) {
        if aj != T::zero() {
            axpy_sub_unchecked(&mut e, col, aj);
        }
    }
    Ok(e)
}
