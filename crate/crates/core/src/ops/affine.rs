use crate::error::{check_dim, Error, Result};
use crate::vecops::norm;
use crate::Scalar;

use super::{DenseMatrix, LinearMap};

/// Solves the square system `M z = rhs` by Gaussian elimination with partial
/// pivoting. Pivots below `1e-12 * max|M|` are treated as zero; the
/// corresponding unknowns are set to zero, which yields a particular solution
/// of a consistent singular system. Inconsistency is left to the caller to
/// detect through the residual.
pub fn solve_dense<T: Scalar>(m: &DenseMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = m.rows();
    check_dim(n, m.cols())?;
    check_dim(n, rhs.len())?;
    let mut a: Vec<T> = m.data().to_vec();
    let mut b = rhs.to_vec();
    let scale = a.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
    let tiny = T::lit(1e-12) * scale.max(T::min_positive_value());
    let mut pivot_cols = Vec::with_capacity(n);
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let (best, best_val) = (row..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((row, T::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_val <= tiny {
            continue;
        }
        if best != row {
            for j in 0..n {
                a.swap(row * n + j, best * n + j);
            }
            b.swap(row, best);
        }
        let p = a[row * n + col];
        for r in row + 1..n {
            let f = a[r * n + col] / p;
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                a[r * n + j] = a[r * n + j] - f * a[row * n + j];
            }
            b[r] = b[r] - f * b[row];
        }
        pivot_cols.push(col);
        row += 1;
    }
    let mut z = vec![T::zero(); n];
    for (r, &col) in pivot_cols.iter().enumerate().rev() {
        let mut acc = b[r];
        for j in col + 1..n {
            acc = acc - a[r * n + j] * z[j];
        }
        z[col] = acc / a[r * n + col];
    }
    Ok(z)
}

/// Euclidean projection of `x` onto `{z : K z = b}` via the normal equations
/// `(K K*) mu = K x - b`, `z = x - K* mu`. Intended for small instances.
pub fn proj_affine<T: Scalar>(k: &DenseMatrix<T>, b: &[T], x: &[T]) -> Result<Vec<T>> {
    check_dim(k.rows(), b.len())?;
    check_dim(k.cols(), x.len())?;
    let kkt = k.matmul(&k.transpose())?;
    let mut rhs = k.apply(x);
    for (r, &bi) in rhs.iter_mut().zip(b) {
        *r = *r - bi;
    }
    let mu = solve_dense(&kkt, &rhs)?;
    let correction = k.adjoint(&mu);
    let z: Vec<T> = x.iter().zip(&correction).map(|(&xi, &ci)| xi - ci).collect();

    let mut residual = k.apply(&z);
    for (r, &bi) in residual.iter_mut().zip(b) {
        *r = *r - bi;
    }
    let tol = T::lit(1e-8) * (T::one() + norm(b));
    if norm(&residual) > tol || !z.iter().all(|v| v.is_finite()) {
        return Err(Error::Infeasible);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[Vec<f64>]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn projection_onto_line() {
        let z = proj_affine(&mat(&[vec![1.0, 1.0]]), &[2.0], &[0.0, 0.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-14 && (z[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_full_rank_square() {
        let id = DenseMatrix::identity(2);
        let z = proj_affine(&id, &[3.0, 4.0], &[-10.0, 7.5]).unwrap();
        assert_eq!(z, vec![3.0, 4.0]);
    }

    #[test]
    fn projection_coordinate_constraint() {
        let z = proj_affine(&mat(&[vec![1.0, 0.0]]), &[5.0], &[2.0, 7.0]).unwrap();
        assert_eq!(z, vec![5.0, 7.0]);
    }

    #[test]
    fn redundant_consistent_rows_are_fine() {
        let k = mat(&[vec![1.0, 1.0], vec![2.0, 2.0]]);
        let z = proj_affine(&k, &[2.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_system_is_infeasible() {
        let k = mat(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(proj_affine(&k, &[1.0, 2.0], &[0.0, 0.0]), Err(Error::Infeasible));
    }

    #[test]
    fn dense_solve_matches_known_solution() {
        let m = mat(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        let z = solve_dense(&m, &[3.0, 5.0, 5.0]).unwrap();
        for v in z {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
