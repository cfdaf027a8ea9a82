use crate::error::{param, Result};
use crate::rng::{pcg32, uniform_symmetric};
use crate::vecops::norm;
use crate::Scalar;

use super::LinearMap;

pub const NORM_MAX_ITERS: usize = 1000;
pub const NORM_TOL: f64 = 1e-9;
/// Applied on top of the power-iteration estimate wherever an upper bound is
/// required.
pub const NORM_SAFETY_FACTOR: f64 = 1.0001;
const START_SEED: u64 = 0x005e_ed0f_0b5e;

/// Power iteration on `K* K` from a fixed pseudo-random start.
///
/// The returned value `||K v||` with `||v|| = 1` never exceeds the true norm.
/// Returns 0 for the zero map.
pub fn op_norm_estimate<T: Scalar, M: LinearMap<T> + ?Sized>(
    map: &M,
    max_iters: usize,
    tol: T,
) -> Result<T> {
    if max_iters == 0 {
        return Err(param("power iteration needs at least one iteration"));
    }
    if !(tol > T::zero()) {
        return Err(param("power iteration tolerance must be positive"));
    }
    if map.in_dim() == 0 || map.out_dim() == 0 {
        return Err(param("linear map has an empty domain or codomain"));
    }
    let mut rng = pcg32(START_SEED);
    let mut v: Vec<T> = (0..map.in_dim()).map(|_| T::lit(uniform_symmetric(&mut rng))).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x = *x / nv);

    let mut w = vec![T::zero(); map.out_dim()];
    let mut u = vec![T::zero(); map.in_dim()];
    let mut sigma = T::zero();
    for _ in 0..max_iters {
        map.apply_to(&v, &mut w);
        let next = norm(&w);
        if !next.is_finite() {
            return Err(param("linear map produced non-finite values"));
        }
        if next == T::zero() {
            return Ok(T::zero());
        }
        let converged = (next - sigma).abs() <= tol * next;
        sigma = next;
        if converged {
            break;
        }
        map.adjoint_to(&w, &mut u);
        let nu = norm(&u);
        if nu == T::zero() {
            break;
        }
        for (vi, &ui) in v.iter_mut().zip(&u) {
            *vi = ui / nu;
        }
    }
    Ok(sigma)
}

/// Estimate with the default budget times [`NORM_SAFETY_FACTOR`].
pub fn op_norm_upper_bound<T: Scalar, M: LinearMap<T> + ?Sized>(map: &M) -> Result<T> {
    Ok(op_norm_estimate(map, NORM_MAX_ITERS, T::lit(NORM_TOL))? * T::lit(NORM_SAFETY_FACTOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{DenseMatrix, Diagonal, Identity};

    #[test]
    fn identity_has_unit_norm() {
        let s: f64 = op_norm_estimate(&Identity(3), 1000, 1e-9).unwrap();
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_norm_is_largest_entry() {
        let s: f64 = op_norm_estimate(&Diagonal(vec![3.0, 1.0]), 1000, 1e-9).unwrap();
        assert!((s - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_map_gives_zero() {
        let z = DenseMatrix::new(2, 3, vec![0.0; 6]).unwrap();
        assert_eq!(op_norm_estimate(&z, 10, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(op_norm_estimate(&Identity(2), 0, 1e-9_f64).is_err());
        assert!(op_norm_estimate(&Identity(2), 10, 0.0_f64).is_err());
        assert!(op_norm_estimate(&Identity(0), 10, 1e-9_f64).is_err());
    }

    #[test]
    fn deterministic() {
        let k = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![0.5, -1.0]]).unwrap();
        let a: f64 = op_norm_estimate(&k, 50, 1e-12).unwrap();
        let b: f64 = op_norm_estimate(&k, 50, 1e-12).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
