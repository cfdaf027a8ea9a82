use std::marker::PhantomData;

use crate::error::{check_dim, Result};
use crate::Scalar;

use super::{DenseMatrix, LinearMap, LipschitzOp};

/// The zero operator on `R^n` (Lipschitz constant 0, i.e. `eta = inf`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroOp(pub usize);

impl<T: Scalar> LipschitzOp<T> for ZeroOp {
    fn dim(&self) -> usize {
        self.0
    }

    fn eval_to(&self, _x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
    }

    fn lipschitz(&self) -> T {
        T::zero()
    }
}

/// `x -> M x + c`. Monotone whenever the symmetric part of `M` is positive
/// semidefinite (not checked).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOp<T> {
    matrix: DenseMatrix<T>,
    offset: Vec<T>,
}

impl<T: Scalar> AffineOp<T> {
    pub fn new(matrix: DenseMatrix<T>, offset: Vec<T>) -> Result<Self> {
        check_dim(matrix.rows(), matrix.cols())?;
        check_dim(matrix.rows(), offset.len())?;
        Ok(Self { matrix, offset })
    }

    pub fn linear(matrix: DenseMatrix<T>) -> Result<Self> {
        let n = matrix.rows();
        Self::new(matrix, vec![T::zero(); n])
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn offset(&self) -> &[T] {
        &self.offset
    }
}

impl<T: Scalar> LipschitzOp<T> for AffineOp<T> {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        self.matrix.apply_to(x, out);
        for (o, &c) in out.iter_mut().zip(&self.offset) {
            *o = *o + c;
        }
    }

    fn lipschitz(&self) -> T {
        self.matrix.norm_bound()
    }
}

/// Gradient of `1/2 ||K x - b||^2`, i.e. `K*(K x - b)`, with Lipschitz
/// constant `||K||^2`. Its zeros are the least-squares solutions of `K x = b`.
#[derive(Debug, Clone)]
pub struct LeastSquaresGradient<T, K> {
    map: K,
    rhs: Vec<T>,
}

impl<T: Scalar, K: LinearMap<T>> LeastSquaresGradient<T, K> {
    pub fn new(map: K, rhs: Vec<T>) -> Result<Self> {
        check_dim(map.out_dim(), rhs.len())?;
        Ok(Self { map, rhs })
    }

    pub fn map(&self) -> &K {
        &self.map
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }
}

impl<T: Scalar, K: LinearMap<T>> LipschitzOp<T> for LeastSquaresGradient<T, K> {
    fn dim(&self) -> usize {
        self.map.in_dim()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        let mut r = self.map.apply(x);
        for (ri, &bi) in r.iter_mut().zip(&self.rhs) {
            *ri = *ri - bi;
        }
        self.map.adjoint_to(&r, out);
    }

    fn lipschitz(&self) -> T {
        let k = self.map.norm_bound();
        k * k
    }
}

/// Closure-backed operator.
pub struct FnOp<T, F> {
    dim: usize,
    lipschitz: T,
    f: F,
    _marker: PhantomData<fn(&[T])>,
}

impl<T: Scalar, F: Fn(&[T], &mut [T])> FnOp<T, F> {
    pub fn new(dim: usize, lipschitz: T, f: F) -> Self {
        Self { dim, lipschitz, f, _marker: PhantomData }
    }
}

impl<T: Scalar, F: Fn(&[T], &mut [T])> LipschitzOp<T> for FnOp<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        (self.f)(x, out)
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}
