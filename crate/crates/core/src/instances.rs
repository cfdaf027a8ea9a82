//! Small reference problems with zeros known in closed form or from the
//! oracle solver.

use crate::error::{check_dim, param, Result};
use crate::minimax::{MinimaxInstance, QuadraticSaddle};
use crate::ops::{AffineOp, AffineResolvent, BoxProx, DenseMatrix, LeastSquaresGradient, LinearMap};
use crate::oracle::{solve_small_inclusion, AffineMap, AffineSet};
use crate::splitting::PenaltyProblem;
use crate::Scalar;

/// `A x = M_a x + c_a`, `D x = M_d x + c_d`, `B x = K'(K x - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineInclusion<T> {
    pub a: DenseMatrix<T>,
    pub a_offset: Vec<T>,
    pub d: DenseMatrix<T>,
    pub d_offset: Vec<T>,
    pub k: DenseMatrix<T>,
    pub b: Vec<T>,
}

pub type AffineProblem<T> = PenaltyProblem<T, AffineResolvent<T>, AffineOp<T>, LeastSquaresGradient<T, DenseMatrix<T>>>;

fn rows_of<T: Scalar>(m: &DenseMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).as_f64()).collect()).collect()
}

fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

impl<T: Scalar> AffineInclusion<T> {
    pub fn new(
        a: DenseMatrix<T>,
        a_offset: Vec<T>,
        d: DenseMatrix<T>,
        d_offset: Vec<T>,
        k: DenseMatrix<T>,
        b: Vec<T>,
    ) -> Result<Self> {
        let n = a.rows();
        for (r, c) in [(a.rows(), a.cols()), (d.rows(), d.cols())] {
            check_dim(n, r)?;
            check_dim(n, c)?;
        }
        check_dim(n, a_offset.len())?;
        check_dim(n, d_offset.len())?;
        check_dim(n, k.cols())?;
        check_dim(k.rows(), b.len())?;
        Ok(Self { a, a_offset, d, d_offset, k, b })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn problem(&self) -> Result<AffineProblem<T>> {
        PenaltyProblem::new(
            AffineResolvent::new(self.a.clone(), self.a_offset.clone())?,
            AffineOp::new(self.d.clone(), self.d_offset.clone())?,
            LeastSquaresGradient::new(self.k.clone(), self.b.clone())?,
        )
    }

    /// Zero of `A + D + N_{Kx=b}` from the independent dense KKT solve.
    pub fn oracle_solution(&self) -> Result<Vec<f64>> {
        let a = AffineMap::new(&rows_of(&self.a), &to_f64(&self.a_offset))?;
        let d = AffineMap::new(&rows_of(&self.d), &to_f64(&self.d_offset))?;
        let c = AffineSet::new(&rows_of(&self.k), &to_f64(&self.b))?;
        solve_small_inclusion(&a, &d, Some(&c), None)
    }

    /// `mu` with `B` being `1/mu`-Lipschitz (`1 / ||K||^2`).
    pub fn mu(&self) -> f64 {
        let k = self.k.norm_bound().as_f64();
        1.0 / (k * k)
    }

    /// `eta` with `D` being `1/eta`-Lipschitz.
    pub fn eta(&self) -> f64 {
        1.0 / self.d.norm_bound().as_f64()
    }
}

fn mat<T: Scalar>(rows: &[&[f64]]) -> DenseMatrix<T> {
    let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
    DenseMatrix::from_rows(&rows).expect("static matrix")
}

fn lits<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

/// Offset making `u` a zero of `M x + c`.
fn offset_for(m: &[&[f64]], u: &[f64]) -> Vec<f64> {
    m.iter().map(|row| -row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()).collect()
}

/// `A x = x`, `D = 0`, `B x = x` on `R`; zero `0`.
pub fn scalar_identity<T: Scalar>() -> AffineInclusion<T> {
    AffineInclusion::new(mat(&[&[1.0]]), lits(&[0.0]), mat(&[&[0.0]]), lits(&[0.0]), mat(&[&[1.0]]), lits(&[0.0]))
        .expect("static instance")
}

/// `A x = diag(1, 2) x - (1, 1)`, `D` the rotation `(x2, -x1)`, `C = {x1 + x2 = 1}`.
/// Strongly monotone, zero `(1/3, 2/3)` with zero multiplier.
pub fn planar_strongly_monotone<T: Scalar>() -> AffineInclusion<T> {
    AffineInclusion::new(
        mat(&[&[1.0, 0.0], &[0.0, 2.0]]),
        lits(&[-1.0, -1.0]),
        mat(&[&[0.0, 1.0], &[-1.0, 0.0]]),
        lits(&[0.0, 0.0]),
        mat(&[&[1.0, 1.0]]),
        lits(&[1.0]),
    )
    .expect("static instance")
}

/// As [`planar_strongly_monotone`] without the offset in `A`: the zero is
/// still `(1/3, 2/3)` but the constraint carries multiplier `-1`.
pub fn planar_kkt<T: Scalar>() -> AffineInclusion<T> {
    AffineInclusion::new(
        mat(&[&[1.0, 0.0], &[0.0, 2.0]]),
        lits(&[0.0, 0.0]),
        mat(&[&[0.0, 1.0], &[-1.0, 0.0]]),
        lits(&[0.0, 0.0]),
        mat(&[&[1.0, 1.0]]),
        lits(&[1.0]),
    )
    .expect("static instance")
}

/// Three-dimensional instance with zero `(0.2, 0.4, 0.1)` and zero multiplier.
pub fn spatial<T: Scalar>() -> AffineInclusion<T> {
    let a: &[&[f64]] = &[&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 2.0]];
    let d: &[&[f64]] = &[&[0.0, 1.0, 0.0], &[-1.0, 0.0, 2.0], &[0.0, -2.0, 0.0]];
    let u = [0.2, 0.4, 0.1];
    let sum: Vec<Vec<f64>> = a.iter().zip(d).map(|(ra, rd)| ra.iter().zip(*rd).map(|(x, y)| x + y).collect()).collect();
    let sum_rows: Vec<&[f64]> = sum.iter().map(Vec::as_slice).collect();
    AffineInclusion::new(
        mat(a),
        lits(&offset_for(&sum_rows, &u)),
        mat(d),
        lits(&[0.0, 0.0, 0.0]),
        mat(&[&[1.0, 2.0, -1.0]]),
        lits(&[0.9]),
    )
    .expect("static instance")
}

/// `f(x, y) = x y` on `[-1, 1]^2` with `x = 0`, `y = 0` imposed; saddle `(0, 0)`.
pub fn bilinear_toy<T: Scalar>() -> MinimaxInstance<T> {
    MinimaxInstance::new(
        Box::new(QuadraticSaddle::bilinear(mat(&[&[1.0]])).expect("static")),
        Box::new(BoxProx::new(1, -T::one(), T::one()).expect("static")),
        Box::new(BoxProx::new(1, -T::one(), T::one()).expect("static")),
        (mat(&[&[1.0]]), lits(&[0.0])),
        (mat(&[&[1.0]]), lits(&[0.0])),
    )
    .expect("static instance")
}

/// `f(x, y) = 1/2 (a'x)^2 + (a'x)(c'y) - 1/2 (c'y)^2` with `a = (1, -1)`,
/// `c = (1, 1)`, boxes `[-2, 2]^2`, `x1 + x2 = 1`, `y1 - y2 = 1`.
/// Saddle `x = (1/2, 1/2)`, `y = (1/2, -1/2)`.
pub fn constrained_quadratic_saddle<T: Scalar>() -> MinimaxInstance<T> {
    let outer = |u: [f64; 2], v: [f64; 2]| mat::<T>(&[&[u[0] * v[0], u[0] * v[1]], &[u[1] * v[0], u[1] * v[1]]]);
    let (a, c) = ([1.0, -1.0], [1.0, 1.0]);
    let f = QuadraticSaddle::new(outer(a, a), outer(a, c), outer(c, c), lits(&[0.0, 0.0]), lits(&[0.0, 0.0]))
        .expect("static");
    let two = T::lit(2.0);
    MinimaxInstance::new(
        Box::new(f),
        Box::new(BoxProx::new(2, -two, two).expect("static")),
        Box::new(BoxProx::new(2, -two, two).expect("static")),
        (mat(&[&[1.0, 1.0]]), lits(&[1.0])),
        (mat(&[&[1.0, -1.0]]), lits(&[1.0])),
    )
    .expect("static instance")
}

/// Stacked field matrix and constraint of a quadratic saddle instance in the
/// form expected by [`solve_small_inclusion`].
pub fn saddle_oracle(f: &QuadraticSaddle<f64>, k1: &DenseMatrix<f64>, b1: &[f64], k2: &DenseMatrix<f64>, b2: &[f64]) -> Result<Vec<f64>> {
    let (m, c) = f.affine_field();
    let n = m.rows();
    if k1.cols() + k2.cols() != n {
        return Err(param("constraint blocks do not match the field"));
    }
    let mut rows = Vec::new();
    for i in 0..k1.rows() {
        let mut r: Vec<f64> = (0..k1.cols()).map(|j| k1.get(i, j)).collect();
        r.resize(n, 0.0);
        rows.push(r);
    }
    for i in 0..k2.rows() {
        let mut r = vec![0.0; k1.cols()];
        r.extend((0..k2.cols()).map(|j| k2.get(i, j)));
        rows.push(r);
    }
    let mut b = b1.to_vec();
    b.extend_from_slice(b2);
    let field = AffineMap::new(&rows_of(&m), &c)?;
    solve_small_inclusion(&AffineMap::zero(n), &field, Some(&AffineSet::new(&rows, &b)?), None)
}
