//! Constrained convex-concave saddle problems
//!
//! `min_{x ∈ X, K1 x = b1} max_{y ∈ Y, K2 y = b2} f(x, y)`
//!
//! cast as a penalized inclusion on the stacked variable `(x, y)`:
//! `A = (N_X, N_Y)`, `D = (∇_1 f, -∇_2 f)`, `B = (K1*(K1 x - b1), K2*(K2 y - b2))`.

use crate::error::{check_dim, Error, Result};
use crate::ops::{op_norm_upper_bound, proj_affine, DenseMatrix, LinearMap, LipschitzOp, ProxOracle};
use crate::schedule::PolySchedule;
use crate::splitting::{run_monitored, Monitor, NoMonitor, PenaltyProblem, RunError, RunOptions, RunRecord};
use crate::vecops::{dist, norm};
use crate::Scalar;

/// Partial gradients of a smooth convex-concave `f`.
pub trait SaddleGradient<T: Scalar> {
    /// `(dim x, dim y)`
    fn dims(&self) -> (usize, usize);
    /// `gx <- ∇_1 f(x, y)`, `gy <- ∇_2 f(x, y)`.
    fn grads_to(&self, x: &[T], y: &[T], gx: &mut [T], gy: &mut [T]);
    /// Lipschitz constant of `(∇_1 f, -∇_2 f)` on the stacked space.
    fn lipschitz(&self) -> T;
}

/// `f(x, y) = 1/2 x'Px + x'Qy - 1/2 y'Ry + p'x - r'y`.
///
/// Convex-concave when `P` and `R` are positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticSaddle<T> {
    p: DenseMatrix<T>,
    q: DenseMatrix<T>,
    r: DenseMatrix<T>,
    px: Vec<T>,
    ry: Vec<T>,
    lipschitz: T,
}

impl<T: Scalar> QuadraticSaddle<T> {
    pub fn new(p: DenseMatrix<T>, q: DenseMatrix<T>, r: DenseMatrix<T>, px: Vec<T>, ry: Vec<T>) -> Result<Self> {
        let (m1, m2) = (p.rows(), r.rows());
        check_dim(m1, p.cols())?;
        check_dim(m2, r.cols())?;
        check_dim(m1, q.rows())?;
        check_dim(m2, q.cols())?;
        check_dim(m1, px.len())?;
        check_dim(m2, ry.len())?;
        let block = Self::block(&p, &q, &r)?;
        let lipschitz = op_norm_upper_bound(&block)?;
        Ok(Self { p, q, r, px, ry, lipschitz })
    }

    /// `f(x, y) = x'Qy` with no quadratic or linear part.
    pub fn bilinear(q: DenseMatrix<T>) -> Result<Self> {
        let (m1, m2) = (q.rows(), q.cols());
        Self::new(
            DenseMatrix::new(m1, m1, vec![T::zero(); m1 * m1])?,
            q,
            DenseMatrix::new(m2, m2, vec![T::zero(); m2 * m2])?,
            vec![T::zero(); m1],
            vec![T::zero(); m2],
        )
    }

    /// `[[P, Q], [-Q', R]]`, the matrix of `(∇_1 f, -∇_2 f)` minus its offset.
    fn block(p: &DenseMatrix<T>, q: &DenseMatrix<T>, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let (m1, m2) = (p.rows(), r.rows());
        let n = m1 + m2;
        let mut data = vec![T::zero(); n * n];
        for i in 0..m1 {
            for j in 0..m1 {
                data[i * n + j] = p.get(i, j);
            }
            for j in 0..m2 {
                data[i * n + m1 + j] = q.get(i, j);
                data[(m1 + j) * n + i] = -q.get(i, j);
            }
        }
        for i in 0..m2 {
            for j in 0..m2 {
                data[(m1 + i) * n + m1 + j] = r.get(i, j);
            }
        }
        DenseMatrix::new(n, n, data)
    }

    /// Matrix and offset of the stacked field `F(x, y) = M (x, y) + c`.
    pub fn affine_field(&self) -> (DenseMatrix<T>, Vec<T>) {
        let block = Self::block(&self.p, &self.q, &self.r).expect("dimensions checked at construction");
        let mut c = self.px.clone();
        c.extend_from_slice(&self.ry);
        (block, c)
    }

    pub fn value(&self, x: &[T], y: &[T]) -> T {
        let half = T::lit(0.5);
        let px = self.p.apply(x);
        let qy = self.q.apply(y);
        let ry = self.r.apply(y);
        let dot = crate::vecops::dot;
        half * dot(x, &px) + dot(x, &qy) - half * dot(y, &ry) + dot(&self.px, x) - dot(&self.ry, y)
    }
}

impl<T: Scalar> SaddleGradient<T> for QuadraticSaddle<T> {
    fn dims(&self) -> (usize, usize) {
        (self.p.rows(), self.r.rows())
    }

    fn grads_to(&self, x: &[T], y: &[T], gx: &mut [T], gy: &mut [T]) {
        // ∇_1 f = Px + Qy + p, ∇_2 f = Q'x - Ry - r
        self.p.apply_to(x, gx);
        let qy = self.q.apply(y);
        for i in 0..gx.len() {
            gx[i] = gx[i] + qy[i] + self.px[i];
        }
        self.q.adjoint_to(x, gy);
        let ry = self.r.apply(y);
        for i in 0..gy.len() {
            gy[i] = gy[i] - ry[i] - self.ry[i];
        }
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

/// Gradient oracle from a closure `(x, y, gx, gy)`.
pub struct FnSaddle<T, F> {
    dims: (usize, usize),
    lipschitz: T,
    f: F,
}

impl<T: Scalar, F: Fn(&[T], &[T], &mut [T], &mut [T])> FnSaddle<T, F> {
    pub fn new(dims: (usize, usize), lipschitz: T, f: F) -> Self {
        Self { dims, lipschitz, f }
    }
}

impl<T: Scalar, F: Fn(&[T], &[T], &mut [T], &mut [T])> SaddleGradient<T> for FnSaddle<T, F> {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn grads_to(&self, x: &[T], y: &[T], gx: &mut [T], gy: &mut [T]) {
        (self.f)(x, y, gx, gy)
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

pub struct MinimaxInstance<T> {
    pub grad: Box<dyn SaddleGradient<T>>,
    pub proj_x: Box<dyn ProxOracle<T>>,
    pub proj_y: Box<dyn ProxOracle<T>>,
    pub k1: DenseMatrix<T>,
    pub b1: Vec<T>,
    pub k2: DenseMatrix<T>,
    pub b2: Vec<T>,
}

impl<T: Scalar> MinimaxInstance<T> {
    pub fn new(
        grad: Box<dyn SaddleGradient<T>>,
        proj_x: Box<dyn ProxOracle<T>>,
        proj_y: Box<dyn ProxOracle<T>>,
        (k1, b1): (DenseMatrix<T>, Vec<T>),
        (k2, b2): (DenseMatrix<T>, Vec<T>),
    ) -> Result<Self> {
        let (m1, m2) = grad.dims();
        check_dim(m1, proj_x.dim())?;
        check_dim(m2, proj_y.dim())?;
        check_dim(m1, k1.cols())?;
        check_dim(k1.rows(), b1.len())?;
        check_dim(m2, k2.cols())?;
        check_dim(k2.rows(), b2.len())?;
        Ok(Self { grad, proj_x, proj_y, k1, b1, k2, b2 })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.grad.dims()
    }

    /// `max(||K1||^2, ||K2||^2)`
    pub fn penalty_lipschitz(&self) -> T {
        let a = self.k1.norm_bound();
        let b = self.k2.norm_bound();
        (a * a).max(b * b)
    }

    pub fn split<'v>(&self, xy: &'v [T]) -> (&'v [T], &'v [T]) {
        xy.split_at(self.dims().0)
    }
}

/// `(proj_X, proj_Y)`
pub struct StackedProjection<'m, T> {
    m: &'m MinimaxInstance<T>,
}

impl<T: Scalar> ProxOracle<T> for StackedProjection<'_, T> {
    fn dim(&self) -> usize {
        let (a, b) = self.m.dims();
        a + b
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let m1 = self.m.dims().0;
        let (ox, oy) = out.split_at_mut(m1);
        self.m.proj_x.prox_to(gamma, &x[..m1], ox);
        self.m.proj_y.prox_to(gamma, &x[m1..], oy);
    }
}

/// `F(x, y) = (∇_1 f(x, y), -∇_2 f(x, y))`
pub struct SaddleField<'m, T> {
    m: &'m MinimaxInstance<T>,
}

impl<T: Scalar> LipschitzOp<T> for SaddleField<'_, T> {
    fn dim(&self) -> usize {
        let (a, b) = self.m.dims();
        a + b
    }

    fn eval_to(&self, xy: &[T], out: &mut [T]) {
        let m1 = self.m.dims().0;
        let (gx, gy) = out.split_at_mut(m1);
        self.m.grad.grads_to(&xy[..m1], &xy[m1..], gx, gy);
        gy.iter_mut().for_each(|g| *g = -*g);
    }

    fn lipschitz(&self) -> T {
        self.m.grad.lipschitz()
    }
}

/// `(K1*(K1 x - b1), K2*(K2 y - b2))`
pub struct StackedPenalty<'m, T> {
    m: &'m MinimaxInstance<T>,
}

fn ls_grad_to<T: Scalar>(k: &DenseMatrix<T>, b: &[T], x: &[T], out: &mut [T]) {
    let mut r = k.apply(x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = *ri - bi;
    }
    k.adjoint_to(&r, out);
}

impl<T: Scalar> LipschitzOp<T> for StackedPenalty<'_, T> {
    fn dim(&self) -> usize {
        let (a, b) = self.m.dims();
        a + b
    }

    fn eval_to(&self, xy: &[T], out: &mut [T]) {
        let m1 = self.m.dims().0;
        let (ox, oy) = out.split_at_mut(m1);
        ls_grad_to(&self.m.k1, &self.m.b1, &xy[..m1], ox);
        ls_grad_to(&self.m.k2, &self.m.b2, &xy[m1..], oy);
    }

    fn lipschitz(&self) -> T {
        self.m.penalty_lipschitz()
    }
}

pub type MinimaxProblem<'m, T> = PenaltyProblem<T, StackedProjection<'m, T>, SaddleField<'m, T>, StackedPenalty<'m, T>>;

pub fn build_minimax_problem<T: Scalar>(m: &MinimaxInstance<T>) -> Result<MinimaxProblem<'_, T>> {
    PenaltyProblem::new(StackedProjection { m }, SaddleField { m }, StackedPenalty { m })
}

/// Runs the penalized extrapolated scheme from `(x0, y0)`; iterates in the
/// record are stacked `(x, y)`.
pub fn alg2_run<T: Scalar>(
    m: &MinimaxInstance<T>,
    s: &PolySchedule,
    x0: &[T],
    y0: &[T],
    opts: &RunOptions,
) -> Result<RunRecord<T>, RunError<T>> {
    alg2_run_monitored(m, s, x0, y0, opts, &mut NoMonitor)
}

pub fn alg2_run_monitored<T: Scalar, M: Monitor<T> + ?Sized>(
    m: &MinimaxInstance<T>,
    s: &PolySchedule,
    x0: &[T],
    y0: &[T],
    opts: &RunOptions,
    monitor: &mut M,
) -> Result<RunRecord<T>, RunError<T>> {
    let mut xy = x0.to_vec();
    xy.extend_from_slice(y0);
    let fail = |error| RunError {
        error,
        partial: RunRecord {
            algorithm: opts.algorithm,
            rows: Vec::new(),
            x: xy.clone(),
            y: xy.clone(),
            z: xy.clone(),
            tau: T::zero(),
            converged: false,
            history: None,
        },
    };
    let (m1, m2) = m.dims();
    if let Err(e) = check_dim(m1, x0.len()).and_then(|_| check_dim(m2, y0.len())) {
        return Err(fail(e));
    }
    let p = build_minimax_problem(m).map_err(fail)?;
    run_monitored(&p, s, &xy, None, opts, monitor)
}

const DYKSTRA_MAX_ITERS: usize = 100_000;
const DYKSTRA_TOL: f64 = 1e-15;

/// Projection onto `C ∩ {Kx = b}` by Dykstra's alternating projections.
pub fn proj_intersection<T: Scalar>(
    proj_c: &dyn ProxOracle<T>,
    k: &DenseMatrix<T>,
    b: &[T],
    point: &[T],
) -> Result<Vec<T>> {
    let n = point.len();
    let mut x = point.to_vec();
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    let mut shifted = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let tol = T::lit(DYKSTRA_TOL) * (T::one() + norm(point));
    for _ in 0..DYKSTRA_MAX_ITERS {
        for i in 0..n {
            shifted[i] = x[i] + p[i];
        }
        proj_c.prox_to(T::one(), &shifted, &mut y);
        for i in 0..n {
            p[i] = shifted[i] - y[i];
            shifted[i] = y[i] + q[i];
        }
        let next = proj_affine(k, b, &shifted)?;
        for i in 0..n {
            q[i] = shifted[i] - next[i];
        }
        let moved = dist(&next, &x);
        let gap = dist(&next, &y);
        x = next;
        if moved <= tol && gap <= tol {
            return Ok(x);
        }
    }
    if dist(&y, &x) <= T::lit(1e-9) * (T::one() + norm(point)) {
        Ok(x)
    } else {
        Err(Error::Infeasible)
    }
}

/// First-order stationarity measure, zero exactly at constrained saddles:
///
/// `||x - P_{X ∩ {K1 x = b1}}(x - ∇_1 f)|| + ||y - P_{Y ∩ {K2 y = b2}}(y + ∇_2 f)||
///  + ||K1 x - b1|| + ||K2 y - b2||`
pub fn saddle_residual<T: Scalar>(m: &MinimaxInstance<T>, x: &[T], y: &[T]) -> Result<T> {
    let (m1, m2) = m.dims();
    check_dim(m1, x.len())?;
    check_dim(m2, y.len())?;
    let mut gx = vec![T::zero(); m1];
    let mut gy = vec![T::zero(); m2];
    m.grad.grads_to(x, y, &mut gx, &mut gy);
    let sx: Vec<T> = x.iter().zip(&gx).map(|(&a, &g)| a - g).collect();
    let sy: Vec<T> = y.iter().zip(&gy).map(|(&a, &g)| a + g).collect();
    let px = proj_intersection(m.proj_x.as_ref(), &m.k1, &m.b1, &sx)?;
    let py = proj_intersection(m.proj_y.as_ref(), &m.k2, &m.b2, &sy)?;
    let feas = |k: &DenseMatrix<T>, b: &[T], v: &[T]| {
        let r: Vec<T> = k.apply(v).iter().zip(b).map(|(&a, &bi)| a - bi).collect();
        norm(&r)
    };
    Ok(dist(x, &px) + dist(y, &py) + feas(&m.k1, &m.b1, x) + feas(&m.k2, &m.b2, y))
}

/// Checks `f(x*, y) <= f(x*, y*) <= f(x, y*)` for the given test points.
pub fn saddle_inequality_holds<T: Scalar>(
    f: &dyn Fn(&[T], &[T]) -> T,
    xs: &[T],
    ys: &[T],
    x_trials: &[Vec<T>],
    y_trials: &[Vec<T>],
    slack: T,
) -> bool {
    let v = f(xs, ys);
    x_trials.iter().all(|x| v <= f(x, ys) + slack) && y_trials.iter().all(|y| f(xs, y) <= v + slack)
}
