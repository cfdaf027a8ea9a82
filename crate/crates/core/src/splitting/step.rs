use crate::error::{check_dim, param, Error, Result};
use crate::ops::{LipschitzOp, ProxOracle};
use crate::vecops::{all_finite, dist};
use crate::Scalar;

use super::PenaltyProblem;

/// Per-step increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo<T> {
    /// `||x_{n+1} - x_n||`
    pub dx: T,
    /// `||y_n - y_{n-1}||`
    pub dy: T,
}

fn check_step<T: Scalar>(lambda: T, beta: T) -> Result<()> {
    if lambda > T::zero() && beta > T::zero() && lambda.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(param(format!("step needs lambda, beta > 0, got ({lambda}, {beta})")))
    }
}

/// State of the extrapolated scheme: `x_n`, the previous trial point
/// `y_{n-1}` and the cached `B(y_{n-1})`, `D(y_{n-1})`.
#[derive(Debug, Clone)]
pub struct FbfEpState<T> {
    pub x: Vec<T>,
    pub y_prev: Vec<T>,
    pub b_prev: Vec<T>,
    pub d_prev: Vec<T>,
    /// Number of completed steps.
    pub n: usize,
    pub b_calls: u64,
    pub d_calls: u64,
    pub resolvent_calls: u64,
    arg: Vec<T>,
    y: Vec<T>,
    b_new: Vec<T>,
    d_new: Vec<T>,
    x_new: Vec<T>,
}

impl<T: Scalar> FbfEpState<T> {
    /// Starts from `x_0` and `y_{-1}` (defaults to `x_0`). Fills the caches
    /// with one evaluation each of `B` and `D`.
    pub fn new<A, D, B>(p: &PenaltyProblem<T, A, D, B>, x0: &[T], y_init: Option<&[T]>) -> Result<Self>
    where
        A: ProxOracle<T>,
        D: LipschitzOp<T>,
        B: LipschitzOp<T>,
    {
        let dim = p.dim();
        check_dim(dim, x0.len())?;
        let y_prev = match y_init {
            Some(y) => {
                check_dim(dim, y.len())?;
                y.to_vec()
            }
            None => x0.to_vec(),
        };
        if !all_finite(x0) || !all_finite(&y_prev) {
            return Err(param("starting points must be finite"));
        }
        let b_prev = p.penalty.eval(&y_prev);
        let d_prev = p.single.eval(&y_prev);
        let zeros = vec![T::zero(); dim];
        Ok(Self {
            x: x0.to_vec(),
            y_prev,
            b_prev,
            d_prev,
            n: 0,
            b_calls: 1,
            d_calls: 1,
            resolvent_calls: 0,
            arg: zeros.clone(),
            y: zeros.clone(),
            b_new: zeros.clone(),
            d_new: zeros.clone(),
            x_new: zeros,
        })
    }

    /// `B(y_{n-1}) == b_prev` and `D(y_{n-1}) == d_prev`, bit for bit.
    pub fn caches_coherent<A, D, B>(&self, p: &PenaltyProblem<T, A, D, B>) -> bool
    where
        A: ProxOracle<T>,
        D: LipschitzOp<T>,
        B: LipschitzOp<T>,
    {
        p.penalty.eval(&self.y_prev) == self.b_prev && p.single.eval(&self.y_prev) == self.d_prev
    }
}

/// One extrapolated step:
///
/// ```text
/// y_n     = J_{lambda A}[x_n - lambda D(y_{n-1}) - lambda beta B(y_{n-1})]
/// x_{n+1} = lambda beta [B(y_{n-1}) - B(y_n)] + lambda [D(y_{n-1}) - D(y_n)] + y_n
/// ```
///
/// Evaluates `B`, `D` and the resolvent exactly once each.
pub fn fbf_ep_step<T, A, D, B>(
    p: &PenaltyProblem<T, A, D, B>,
    s: &mut FbfEpState<T>,
    lambda: T,
    beta: T,
) -> Result<StepInfo<T>>
where
    T: Scalar,
    A: ProxOracle<T>,
    D: LipschitzOp<T>,
    B: LipschitzOp<T>,
{
    check_step(lambda, beta)?;
    let lb = lambda * beta;
    for i in 0..s.x.len() {
        s.arg[i] = s.x[i] - lambda * s.d_prev[i] - lb * s.b_prev[i];
    }
    p.resolvent.prox_to(lambda, &s.arg, &mut s.y);
    p.penalty.eval_to(&s.y, &mut s.b_new);
    p.single.eval_to(&s.y, &mut s.d_new);
    s.resolvent_calls += 1;
    s.b_calls += 1;
    s.d_calls += 1;
    for i in 0..s.x.len() {
        s.x_new[i] = lb * (s.b_prev[i] - s.b_new[i]) + lambda * (s.d_prev[i] - s.d_new[i]) + s.y[i];
    }
    if !all_finite(&s.y) || !all_finite(&s.x_new) {
        return Err(Error::Divergence { iteration: s.n });
    }
    let info = StepInfo { dx: dist(&s.x_new, &s.x), dy: dist(&s.y, &s.y_prev) };
    std::mem::swap(&mut s.x, &mut s.x_new);
    std::mem::swap(&mut s.y_prev, &mut s.y);
    std::mem::swap(&mut s.b_prev, &mut s.b_new);
    std::mem::swap(&mut s.d_prev, &mut s.d_new);
    s.n += 1;
    Ok(info)
}

/// State of the classical scheme: only `x_n` is carried; `y_prev` keeps the
/// last trial point for diagnostics.
#[derive(Debug, Clone)]
pub struct FbfState<T> {
    pub x: Vec<T>,
    pub y_prev: Vec<T>,
    pub n: usize,
    pub b_calls: u64,
    pub d_calls: u64,
    pub resolvent_calls: u64,
    arg: Vec<T>,
    y: Vec<T>,
    bx: Vec<T>,
    dx: Vec<T>,
    by: Vec<T>,
    dy: Vec<T>,
    x_new: Vec<T>,
}

impl<T: Scalar> FbfState<T> {
    pub fn new(dim: usize, x0: &[T], y_init: Option<&[T]>) -> Result<Self> {
        check_dim(dim, x0.len())?;
        let y_prev = match y_init {
            Some(y) => {
                check_dim(dim, y.len())?;
                y.to_vec()
            }
            None => x0.to_vec(),
        };
        if !all_finite(x0) || !all_finite(&y_prev) {
            return Err(param("starting points must be finite"));
        }
        let zeros = vec![T::zero(); dim];
        Ok(Self {
            x: x0.to_vec(),
            y_prev,
            n: 0,
            b_calls: 0,
            d_calls: 0,
            resolvent_calls: 0,
            arg: zeros.clone(),
            y: zeros.clone(),
            bx: zeros.clone(),
            dx: zeros.clone(),
            by: zeros.clone(),
            dy: zeros.clone(),
            x_new: zeros,
        })
    }
}

/// One step of Tseng's scheme with penalty, evaluating at `x_n`:
///
/// ```text
/// y_n     = J_{lambda A}[x_n - lambda D(x_n) - lambda beta B(x_n)]
/// x_{n+1} = lambda beta [B(x_n) - B(y_n)] + lambda [D(x_n) - D(y_n)] + y_n
/// ```
///
/// Evaluates `B` and `D` twice each.
pub fn fbf_step<T, A, D, B>(
    p: &PenaltyProblem<T, A, D, B>,
    s: &mut FbfState<T>,
    lambda: T,
    beta: T,
) -> Result<StepInfo<T>>
where
    T: Scalar,
    A: ProxOracle<T>,
    D: LipschitzOp<T>,
    B: LipschitzOp<T>,
{
    check_step(lambda, beta)?;
    let lb = lambda * beta;
    p.penalty.eval_to(&s.x, &mut s.bx);
    p.single.eval_to(&s.x, &mut s.dx);
    for i in 0..s.x.len() {
        s.arg[i] = s.x[i] - lambda * s.dx[i] - lb * s.bx[i];
    }
    p.resolvent.prox_to(lambda, &s.arg, &mut s.y);
    p.penalty.eval_to(&s.y, &mut s.by);
    p.single.eval_to(&s.y, &mut s.dy);
    s.resolvent_calls += 1;
    s.b_calls += 2;
    s.d_calls += 2;
    for i in 0..s.x.len() {
        s.x_new[i] = lb * (s.bx[i] - s.by[i]) + lambda * (s.dx[i] - s.dy[i]) + s.y[i];
    }
    if !all_finite(&s.y) || !all_finite(&s.x_new) {
        return Err(Error::Divergence { iteration: s.n });
    }
    let info = StepInfo { dx: dist(&s.x_new, &s.x), dy: dist(&s.y, &s.y_prev) };
    std::mem::swap(&mut s.x, &mut s.x_new);
    std::mem::swap(&mut s.y_prev, &mut s.y);
    s.n += 1;
    Ok(info)
}
