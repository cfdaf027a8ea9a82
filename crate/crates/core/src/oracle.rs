//! Brute-force references for small instances, written against `nalgebra`
//! in `f64` and sharing no kernels with the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{param, Error, Result};
use crate::rng::{pcg32, uniform_symmetric};

/// `v ↦ M v + c` on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(rows: &[Vec<f64>], offset: &[f64]) -> Result<Self> {
        let n = offset.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(param("affine map must be square and match its offset"));
        }
        Ok(Self { matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]), offset: DVector::from_column_slice(offset) })
    }

    pub fn zero(n: usize) -> Self {
        Self { matrix: DMatrix::zeros(n, n), offset: DVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }
}

impl AffineMap {
    /// Smallest eigenvalue of the symmetric part of the matrix; the map is
    /// monotone iff this is nonnegative.
    pub fn monotonicity_modulus(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

/// `{x : K x = b}`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSet {
    pub k: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl AffineSet {
    pub fn new(rows: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.len() != b.len() || rows.iter().any(|r| r.len() != cols) {
            return Err(param("constraint rows must match the right-hand side"));
        }
        Ok(Self { k: DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]), b: DVector::from_column_slice(b) })
    }
}

const FIXED_POINT_MAX_ITERS: usize = 2_000_000;

/// A zero of `A + D + N_C` (intersected with `[lo, hi]^n` when `bounds` is
/// given), for affine `A`, `D` and affine `C`.
///
/// Without bounds the KKT system `[[M, K'], [K, 0]] (u, m) = (-c, b)` is
/// solved directly. With bounds, `M` must have a positive definite symmetric
/// part and the projected iteration `u <- P(u - g (M u + c))` is run to a
/// fixed point, projecting onto the box and `C` by Dykstra's method.
pub fn solve_small_inclusion(
    a: &AffineMap,
    d: &AffineMap,
    c: Option<&AffineSet>,
    bounds: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    let n = a.dim();
    if d.dim() != n || c.is_some_and(|c| c.k.ncols() != n) {
        return Err(param("inconsistent oracle dimensions"));
    }
    if n == 0 || n > 50 {
        return Err(param("oracle handles dimensions 1..=50"));
    }
    let m = &a.matrix + &d.matrix;
    let off = &a.offset + &d.offset;
    match bounds {
        None => kkt_solve(&m, &off, c),
        Some((lo, hi)) => projected_fixed_point(&m, &off, c, lo, hi),
    }
}

fn kkt_solve(m: &DMatrix<f64>, off: &DVector<f64>, c: Option<&AffineSet>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let p = c.map_or(0, |c| c.k.nrows());
    let mut kkt = DMatrix::zeros(n + p, n + p);
    kkt.view_mut((0, 0), (n, n)).copy_from(m);
    let mut rhs = DVector::zeros(n + p);
    rhs.rows_mut(0, n).copy_from(&(-off));
    if let Some(c) = c {
        kkt.view_mut((0, n), (n, p)).copy_from(&c.k.transpose());
        kkt.view_mut((n, 0), (p, n)).copy_from(&c.k);
        rhs.rows_mut(n, p).copy_from(&c.b);
    }
    let svd = kkt.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax.max(1.0)) {
        return Err(Error::Singular);
    }
    let sol = kkt.lu().solve(&rhs).ok_or(Error::Singular)?;
    let u = sol.rows(0, n).into_owned();
    let mut res = m * &u + off;
    if let Some(c) = c {
        res += c.k.transpose() * sol.rows(n, p);
        if (&c.k * &u - &c.b).norm() > 1e-10 * (1.0 + c.b.norm()) {
            return Err(Error::Singular);
        }
    }
    if res.norm() > 1e-10 * (1.0 + off.norm() + u.norm()) {
        return Err(Error::Singular);
    }
    Ok(u.as_slice().to_vec())
}

fn project_affine(c: &AffineSet, gram_inv: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    v - c.k.transpose() * (gram_inv * (&c.k * v - &c.b))
}

fn project_feasible(c: Option<(&AffineSet, &DMatrix<f64>)>, lo: f64, hi: f64, v: &DVector<f64>) -> DVector<f64> {
    let clamp = |w: &DVector<f64>| w.map(|t| t.clamp(lo, hi));
    let Some((c, gi)) = c else { return clamp(v) };
    let mut x = v.clone();
    let mut p = DVector::zeros(v.len());
    let mut q = DVector::zeros(v.len());
    for _ in 0..100_000 {
        let y = clamp(&(&x + &p));
        p = &x + &p - &y;
        let xn = project_affine(c, gi, &(&y + &q));
        q = &y + &q - &xn;
        let done = (&xn - &x).norm() <= 1e-16 * (1.0 + v.norm()) && (&xn - &y).norm() <= 1e-15 * (1.0 + v.norm());
        x = xn;
        if done {
            break;
        }
    }
    x
}

fn projected_fixed_point(m: &DMatrix<f64>, off: &DVector<f64>, c: Option<&AffineSet>, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo <= hi) {
        return Err(param("empty box"));
    }
    let sym = (m + m.transpose()) * 0.5;
    let modulus = sym.symmetric_eigenvalues().min();
    if !(modulus > 0.0) {
        return Err(Error::Singular);
    }
    let lip = m.clone().svd(false, false).singular_values.max();
    let step = modulus / (lip * lip);
    let gram_inv = match c {
        Some(c) => Some((&c.k * c.k.transpose()).try_inverse().ok_or(Error::Singular)?),
        None => None,
    };
    let pc = c.zip(gram_inv.as_ref());
    let n = m.nrows();
    let mut u = project_feasible(pc, lo, hi, &DVector::zeros(n));
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let next = project_feasible(pc, lo, hi, &(&u - (m * &u + off) * step));
        let moved = (&next - &u).norm();
        u = next;
        if moved <= 1e-15 * (1.0 + u.norm()) {
            return Ok(u.as_slice().to_vec());
        }
    }
    Err(Error::Singular)
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_diff_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(param(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let fp = f(&probe);
            probe[i] = x[i] - h;
            let fm = f(&probe);
            probe[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect())
}

/// Tests whether `p` minimizes `z ↦ f(z) + ||z - x||^2 / (2 gamma)` against
/// `trials` random points around `p` at radii from `1` down to `1e-4`.
pub fn prox_optimality_check(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    p: &[f64],
    gamma: f64,
    trials: usize,
) -> Result<bool> {
    if !(gamma > 0.0) {
        return Err(param(format!("prox step must be positive, got {gamma}")));
    }
    if x.len() != p.len() {
        return Err(Error::Dimension { expected: x.len(), got: p.len() });
    }
    let obj = |z: &[f64]| {
        let d: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        f(z) + d / (2.0 * gamma)
    };
    let base = obj(p);
    let mut rng = pcg32(0x5eed);
    let radii = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];
    for t in 0..trials {
        let r = radii[t % radii.len()];
        let z: Vec<f64> = p.iter().map(|&pi| pi + r * uniform_symmetric(&mut rng)).collect();
        if base > obj(&z) + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}
