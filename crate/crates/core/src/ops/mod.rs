//! Operator oracles: linear maps, single-valued Lipschitz operators and
//! resolvents/proximity operators, plus the primitives built on them.

mod affine;
mod counted;
mod lipschitz;
mod linear;
mod norm;
mod prox;

pub use affine::{proj_affine, solve_dense};
pub use counted::Counted;
pub use lipschitz::{AffineOp, FnOp, LeastSquaresGradient, ZeroOp};
pub use linear::{DenseMatrix, Diagonal, Identity};
pub use norm::{op_norm_estimate, op_norm_upper_bound, NORM_MAX_ITERS, NORM_SAFETY_FACTOR, NORM_TOL};
pub use prox::{
    moreau_conjugate_prox, prox_box, AffineResolvent, BoxProx, ConjugateProx, FnProx, L1Prox,
    ScaledIdentityResolvent, SquaredNormProx, ZeroProx,
};

use crate::Scalar;

/// Bounded linear operator with its adjoint.
pub trait LinearMap<T: Scalar> {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// `out <- K x`; `x.len() == in_dim`, `out.len() == out_dim`.
    fn apply_to(&self, x: &[T], out: &mut [T]);
    /// `out <- K* y`; `y.len() == out_dim`, `out.len() == in_dim`.
    fn adjoint_to(&self, y: &[T], out: &mut [T]);
    /// Upper bound on the operator norm.
    fn norm_bound(&self) -> T;

    fn apply(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.out_dim()];
        self.apply_to(x, &mut out);
        out
    }

    fn adjoint(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.in_dim()];
        self.adjoint_to(y, &mut out);
        out
    }
}

/// Single-valued monotone operator with a Lipschitz constant.
///
/// A constant of zero denotes the zero operator (its inverse constant is
/// infinite).
pub trait LipschitzOp<T: Scalar> {
    fn dim(&self) -> usize;
    fn eval_to(&self, x: &[T], out: &mut [T]);
    fn lipschitz(&self) -> T;

    fn eval(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.eval_to(x, &mut out);
        out
    }
}

/// Resolvent `J_{gamma A} = (Id + gamma A)^{-1}` of a maximally monotone
/// operator. For `A = ∂f` this is `prox_{gamma f}`.
pub trait ProxOracle<T: Scalar> {
    fn dim(&self) -> usize;
    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]);

    fn prox(&self, gamma: T, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.prox_to(gamma, x, &mut out);
        out
    }
}

macro_rules! forward_impls {
    ($($ptr:ty),*) => {$(
        impl<T: Scalar, X: LinearMap<T> + ?Sized> LinearMap<T> for $ptr {
            fn in_dim(&self) -> usize { (**self).in_dim() }
            fn out_dim(&self) -> usize { (**self).out_dim() }
            fn apply_to(&self, x: &[T], out: &mut [T]) { (**self).apply_to(x, out) }
            fn adjoint_to(&self, y: &[T], out: &mut [T]) { (**self).adjoint_to(y, out) }
            fn norm_bound(&self) -> T { (**self).norm_bound() }
        }

        impl<T: Scalar, X: LipschitzOp<T> + ?Sized> LipschitzOp<T> for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn eval_to(&self, x: &[T], out: &mut [T]) { (**self).eval_to(x, out) }
            fn lipschitz(&self) -> T { (**self).lipschitz() }
        }

        impl<T: Scalar, X: ProxOracle<T> + ?Sized> ProxOracle<T> for $ptr {
            fn dim(&self) -> usize { (**self).dim() }
            fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) { (**self).prox_to(gamma, x, out) }
        }
    )*};
}

forward_impls!(&X, Box<X>, std::sync::Arc<X>);
