use crate::error::{check_dim, param, Result};
use crate::Scalar;

use super::LinearMap;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    norm_bound: T,
}

impl<T: Scalar> DenseMatrix<T> {
    /// The norm bound defaults to the Frobenius norm.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(param("matrix dimensions must be positive"));
        }
        check_dim(rows * cols, data.len())?;
        let frob = data.iter().map(|&v| v * v).sum::<T>().sqrt();
        Ok(Self { rows, cols, data, norm_bound: frob })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            check_dim(n_cols, r.len())?;
            data.extend_from_slice(r);
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self { rows: n, cols: n, data, norm_bound: T::one() }
    }

    /// Replaces the norm bound, e.g. with a sharper estimate.
    pub fn with_norm_bound(mut self, bound: T) -> Self {
        self.norm_bound = bound;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![T::zero(); self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self { rows: self.cols, cols: self.rows, data, norm_bound: self.norm_bound }
    }

    /// `self * other`
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dim(self.cols, other.rows)?;
        let mut data = vec![T::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                data[i * other.cols + j] = acc;
            }
        }
        Self::new(self.rows, other.cols, data)
    }
}

impl<T: Scalar> LinearMap<T> for DenseMatrix<T> {
    fn in_dim(&self) -> usize {
        self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows
    }

    fn apply_to(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = T::zero();
            for (&a, &b) in row.iter().zip(x) {
                acc = acc + a * b;
            }
            *o = acc;
        }
    }

    fn adjoint_to(&self, y: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.rows);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (i, &yi) in y.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * yi;
            }
        }
    }

    fn norm_bound(&self) -> T {
        self.norm_bound
    }
}

/// Identity on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity(pub usize);

impl<T: Scalar> LinearMap<T> for Identity {
    fn in_dim(&self) -> usize {
        self.0
    }

    fn out_dim(&self) -> usize {
        self.0
    }

    fn apply_to(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
    }

    fn adjoint_to(&self, y: &[T], out: &mut [T]) {
        out.copy_from_slice(y);
    }

    fn norm_bound(&self) -> T {
        T::one()
    }
}

/// Diagonal map `diag(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal<T>(pub Vec<T>);

impl<T: Scalar> LinearMap<T> for Diagonal<T> {
    fn in_dim(&self) -> usize {
        self.0.len()
    }

    fn out_dim(&self) -> usize {
        self.0.len()
    }

    fn apply_to(&self, x: &[T], out: &mut [T]) {
        for ((o, &d), &xi) in out.iter_mut().zip(&self.0).zip(x) {
            *o = d * xi;
        }
    }

    fn adjoint_to(&self, y: &[T], out: &mut [T]) {
        self.apply_to(y, out);
    }

    fn norm_bound(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &d| m.max(d.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_apply_and_adjoint() {
        let k = DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 3.0]]).unwrap();
        assert_eq!(k.apply(&[1.0, 1.0, 1.0]), vec![3.0, 2.0]);
        assert_eq!(k.adjoint(&[1.0, 2.0]), vec![1.0, 0.0, 6.0]);
        assert_eq!(k.transpose().apply(&[1.0, 2.0]), vec![1.0, 0.0, 6.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, crate::Error::Dimension { .. }));
    }

    #[test]
    fn frobenius_bound_dominates_norm() {
        let k = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(LinearMap::<f64>::norm_bound(&k), 5.0);
        assert_eq!(LinearMap::<f64>::norm_bound(&Diagonal(vec![3.0, -7.0])), 7.0);
    }
}
