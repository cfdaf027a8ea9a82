use std::marker::PhantomData;

use crate::error::{check_dim, param, Result};
use crate::Scalar;

use super::{affine::solve_dense, DenseMatrix, LinearMap, ProxOracle};

/// Entrywise clamp to `[lo, hi]`: the prox of the indicator of a box, for any
/// step size.
pub fn prox_box<T: Scalar>(x: &[T], lo: T, hi: T) -> Result<Vec<T>> {
    if !(lo <= hi) {
        return Err(param(format!("empty box [{lo}, {hi}]")));
    }
    Ok(x.iter().map(|&v| v.max(lo).min(hi)).collect())
}

/// `prox_{gamma g*}(x) = x - gamma * prox_{g/gamma}(x/gamma)` (Moreau
/// decomposition), given the prox oracle of `g`.
pub fn moreau_conjugate_prox<T: Scalar, P: ProxOracle<T> + ?Sized>(
    g: &P,
    gamma: T,
    x: &[T],
) -> Result<Vec<T>> {
    if !(gamma > T::zero()) {
        return Err(param(format!("conjugate prox step must be positive, got {gamma}")));
    }
    check_dim(g.dim(), x.len())?;
    let mut out = vec![T::zero(); x.len()];
    conjugate_prox_to(g, gamma, x, &mut out);
    Ok(out)
}

fn conjugate_prox_to<T: Scalar, P: ProxOracle<T> + ?Sized>(g: &P, gamma: T, x: &[T], out: &mut [T]) {
    let scaled: Vec<T> = x.iter().map(|&v| v / gamma).collect();
    g.prox_to(T::one() / gamma, &scaled, out);
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = xi - gamma * *o;
    }
}

/// Resolvent of the inverse subdifferential, `J_{gamma (∂g)^{-1}} = prox_{gamma g*}`,
/// evaluated from the prox of `g` through the Moreau decomposition.
#[derive(Debug, Clone)]
pub struct ConjugateProx<P>(pub P);

impl<T: Scalar, P: ProxOracle<T>> ProxOracle<T> for ConjugateProx<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        conjugate_prox_to(&self.0, gamma, x, out)
    }
}

/// Projection onto the box `[lo, hi]^n` (prox of its indicator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxProx<T> {
    pub dim: usize,
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> BoxProx<T> {
    pub fn new(dim: usize, lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) {
            return Err(param(format!("empty box [{lo}, {hi}]")));
        }
        Ok(Self { dim, lo, hi })
    }
}

impl<T: Scalar> ProxOracle<T> for BoxProx<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox_to(&self, _gamma: T, x: &[T], out: &mut [T]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.max(self.lo).min(self.hi);
        }
    }
}

/// Prox of `weight * ||.||_1` (soft thresholding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Prox<T> {
    pub dim: usize,
    pub weight: T,
}

impl<T: Scalar> ProxOracle<T> for L1Prox<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let t = gamma * self.weight;
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.signum() * (v.abs() - t).max(T::zero());
        }
    }
}

/// Prox of `1/2 ||.||^2`: `x / (1 + gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquaredNormProx(pub usize);

impl<T: Scalar> ProxOracle<T> for SquaredNormProx {
    fn dim(&self) -> usize {
        self.0
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let s = T::one() + gamma;
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v / s;
        }
    }
}

/// Resolvent of the zero operator: the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroProx(pub usize);

impl<T: Scalar> ProxOracle<T> for ZeroProx {
    fn dim(&self) -> usize {
        self.0
    }

    fn prox_to(&self, _gamma: T, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
    }
}

/// Resolvent of `A x = a x` with `a >= 0`: `x / (1 + gamma a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledIdentityResolvent<T> {
    pub dim: usize,
    pub a: T,
}

impl<T: Scalar> ProxOracle<T> for ScaledIdentityResolvent<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let s = T::one() + gamma * self.a;
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v / s;
        }
    }
}

/// Resolvent of the affine monotone operator `A x = M x + c`:
/// `J_{gamma A}(v) = (Id + gamma M)^{-1} (v - gamma c)`, by a dense solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineResolvent<T> {
    matrix: DenseMatrix<T>,
    offset: Vec<T>,
}

impl<T: Scalar> AffineResolvent<T> {
    pub fn new(matrix: DenseMatrix<T>, offset: Vec<T>) -> Result<Self> {
        check_dim(matrix.rows(), matrix.cols())?;
        check_dim(matrix.rows(), offset.len())?;
        Ok(Self { matrix, offset })
    }
}

impl<T: Scalar> ProxOracle<T> for AffineResolvent<T> {
    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let n = self.offset.len();
        let mut data: Vec<T> = self.matrix.data().iter().map(|&m| gamma * m).collect();
        for i in 0..n {
            data[i * n + i] = data[i * n + i] + T::one();
        }
        let lhs = DenseMatrix::new(n, n, data).expect("square system");
        let rhs: Vec<T> = x.iter().zip(&self.offset).map(|(&v, &c)| v - gamma * c).collect();
        let z = solve_dense(&lhs, &rhs).expect("dimensions checked at construction");
        out.copy_from_slice(&z);
    }
}

impl<T: Scalar> AffineResolvent<T> {
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn offset(&self) -> &[T] {
        &self.offset
    }

    /// Norm bound of the linear part (a Lipschitz constant of `A`).
    pub fn lipschitz(&self) -> T {
        self.matrix.norm_bound()
    }
}

/// Closure-backed prox oracle.
pub struct FnProx<T, F> {
    dim: usize,
    f: F,
    _marker: PhantomData<fn(T)>,
}

impl<T: Scalar, F: Fn(T, &[T], &mut [T])> FnProx<T, F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, _marker: PhantomData }
    }
}

impl<T: Scalar, F: Fn(T, &[T], &mut [T])> ProxOracle<T> for FnProx<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        (self.f)(gamma, x, out)
    }
}
