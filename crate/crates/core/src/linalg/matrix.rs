use std::ops::{Deref, DerefMut};

use super::scalar::{Precision, Scalar};
use crate::error::{check_len, Result, SolveError};

/// Owned contiguous vector. Derefs to a slice, so every kernel that takes
/// `&[T]` accepts it directly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector<T>(Vec<T>);

impl<T: Scalar> DenseVector<T> {
    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![T::zero(); len])
    }

    pub fn from_vec(data: Vec<T>) -> Self {
        DenseVector(data)
    }

    pub fn from_slice(data: &[T]) -> Self {
        DenseVector(data.to_vec())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    /// Converts every element to another precision through `f64`.
    pub fn cast<U: Scalar>(&self) -> DenseVector<U> {
        DenseVector(self.0.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect())
    }
}

impl<T> Deref for DenseVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for DenseVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for DenseVector<T> {
    fn from(data: Vec<T>) -> Self {
        DenseVector(data)
    }
}

/// Column-major dense matrix with `rows` observations and `cols` variables.
///
/// Column `j` occupies `data[j * rows..(j + 1) * rows]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    data: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SolveError::DegenerateInput("matrix must have at least one row and column"));
        }
        let expected = rows.checked_mul(cols).ok_or(SolveError::DegenerateInput("matrix size overflows"))?;
        check_len("matrix data", expected, data.len())?;
        Ok(DenseMatrix { data, rows, cols })
    }

    /// Builds a matrix from row-major data, the natural layout for literals.
    pub fn from_row_major(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        check_len("matrix data", rows * cols, data.len())?;
        let mut col_major = Vec::with_capacity(data.len());
        for j in 0..cols {
            col_major.extend((0..rows).map(|i| data[i * cols + j]));
        }
        Self::from_col_major(rows, cols, col_major)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_col_major(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// Raw column-major storage.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[col * self.rows + row]
    }

    /// Borrowed view of column `j`; no copy is made.
    pub fn column(&self, j: usize) -> Result<&[T]> {
        if j >= self.cols {
            return Err(SolveError::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        Ok(self.col(j))
    }

    #[inline]
    pub(crate) fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.rows)
    }

    /// Copies the listed columns, in order, into a new matrix.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(SolveError::DegenerateInput("no columns selected"));
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for &j in indices {
            data.extend_from_slice(self.column(j)?);
        }
        Self::from_col_major(self.rows, indices.len(), data)
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            data: self.data.iter().map(|v| U::from_f64_lossy(v.to_f64_lossy())).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

/// Column view (`column_view`): the free-function form of [`DenseMatrix::column`].
pub fn column_view<T: Scalar>(x: &DenseMatrix<T>, j: usize) -> Result<&[T]> {
    x.column(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_view_is_storage_slice() {
        let m = DenseMatrix::from_col_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(column_view(&m, 1).unwrap(), &[3.0, 4.0]);
        assert_eq!(column_view(&m, 0).unwrap(), &m.data()[..2]);
        let view = column_view(&m, 1).unwrap();
        assert!(std::ptr::eq(view.as_ptr(), m.data()[2..].as_ptr()));
    }

    #[test]
    fn column_view_rejects_out_of_range() {
        let m = DenseMatrix::<f64>::zeros(3, 2).unwrap();
        assert_eq!(
            column_view(&m, 2),
            Err(SolveError::IndexOutOfRange { index: 2, len: 2 })
        );
    }

    #[test]
    fn row_major_constructor_transposes_storage() {
        let m = DenseMatrix::from_row_major(2, 2, &[1.0f64, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.data(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn shape_invariants_enforced() {
        assert!(DenseMatrix::<f64>::from_col_major(0, 3, vec![]).is_err());
        assert!(DenseMatrix::<f64>::from_col_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::<f64>::zeros(2, 0).is_err());
    }

    #[test]
    fn select_columns_keeps_order() {
        let m = DenseMatrix::from_row_major(2, 3, &[1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let s = m.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.data(), &[3.0, 6.0, 1.0, 4.0]);
        assert!(m.select_columns(&[3]).is_err());
    }
}
