use crate::error::{check_dim, param, Result};
use crate::Scalar;

/// Running step-size weighted mean `z_n = (1/tau_n) sum_k lambda_k x_k`,
/// `tau_n = sum_k lambda_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicAverage<T> {
    z: Vec<T>,
    tau: T,
}

impl<T: Scalar> ErgodicAverage<T> {
    /// Empty average (`tau = 0`); the first update sets `z = x`.
    pub fn new(dim: usize) -> Self {
        Self { z: vec![T::zero(); dim], tau: T::zero() }
    }

    /// `tau' = tau + lambda`, `z' = z + (lambda / tau') (x - z)`.
    pub fn update(&mut self, x: &[T], lambda: T) -> Result<()> {
        if !(lambda > T::zero()) {
            return Err(param(format!("averaging weight must be positive, got {lambda}")));
        }
        check_dim(self.z.len(), x.len())?;
        self.tau = self.tau + lambda;
        let w = lambda / self.tau;
        for (zi, &xi) in self.z.iter_mut().zip(x) {
            *zi = *zi + w * (xi - *zi);
        }
        Ok(())
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn into_parts(self) -> (Vec<T>, T) {
        (self.z, self.tau)
    }
}
