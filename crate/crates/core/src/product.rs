//! Product-space lift of `0 ∈ Ax + Σ L_i* B_i L_i x + Dx + N_C(x)` onto
//! `H × G_1 × … × G_m`, and its proximal instantiation.
//!
//! A lifted point `(x, v_1, …, v_m)` is one flat vector; [`Layout`] records
//! the block offsets.

use crate::error::{check_dim, param, Result};
use crate::ops::{ConjugateProx, LinearMap, LipschitzOp, ProxOracle};
use crate::schedule::PolySchedule;
use crate::splitting::{run_monitored, Monitor, NoMonitor, PenaltyProblem, RunError, RunOptions, RunRecord};
use crate::vecops::norm_sq;
use crate::Scalar;

/// One composed term `L_i* B_i L_i`, given through `J_{gamma B_i^{-1}}` and `L_i`.
pub struct Term<T> {
    pub inv_resolvent: Box<dyn ProxOracle<T>>,
    pub map: Box<dyn LinearMap<T>>,
}

/// Problem data on `H`: resolvent of `A`, `D` (constant `nu`), `B`
/// (constant `1/mu`) and the composed terms.
pub struct CompositeProblem<T> {
    pub resolvent: Box<dyn ProxOracle<T>>,
    pub single: Box<dyn LipschitzOp<T>>,
    pub penalty: Box<dyn LipschitzOp<T>>,
    pub terms: Vec<Term<T>>,
    dim: usize,
}

impl<T: Scalar> CompositeProblem<T> {
    pub fn new(
        resolvent: Box<dyn ProxOracle<T>>,
        single: Box<dyn LipschitzOp<T>>,
        penalty: Box<dyn LipschitzOp<T>>,
    ) -> Result<Self> {
        let dim = resolvent.dim();
        check_dim(dim, single.dim())?;
        check_dim(dim, penalty.dim())?;
        Ok(Self { resolvent, single, penalty, terms: Vec::new(), dim })
    }

    /// Adds `L* B L` given `J_{gamma B^{-1}}` and `L`.
    pub fn with_term(mut self, inv_resolvent: Box<dyn ProxOracle<T>>, map: Box<dyn LinearMap<T>>) -> Result<Self> {
        check_dim(self.dim, map.in_dim())?;
        check_dim(map.out_dim(), inv_resolvent.dim())?;
        if !(map.norm_bound() > T::zero()) {
            return Err(param("composed linear maps must be nonzero"));
        }
        self.terms.push(Term { inv_resolvent, map });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.dim, self.terms.iter().map(|t| t.map.out_dim()))
    }

    /// `nu + sqrt(Σ ||L_i||^2)`
    pub fn lifted_lipschitz(&self) -> T {
        let s: T = self.terms.iter().map(|t| t.map.norm_bound() * t.map.norm_bound()).sum();
        self.single.lipschitz() + s.sqrt()
    }
}

/// Block offsets of a lifted point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    offsets: Vec<usize>,
}

impl Layout {
    pub fn new(primal: usize, duals: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0, primal];
        for d in duals {
            let last = *offsets.last().unwrap();
            offsets.push(last + d);
        }
        Self { offsets }
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn terms(&self) -> usize {
        self.offsets.len() - 2
    }

    pub fn primal(&self) -> std::ops::Range<usize> {
        0..self.offsets[1]
    }

    pub fn dual(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i + 1]..self.offsets[i + 2]
    }
}

/// `(x, v_1, …, v_m)` stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint<T> {
    pub data: Vec<T>,
    pub layout: Layout,
}

impl<T: Scalar> LiftedPoint<T> {
    pub fn zeros(layout: Layout) -> Self {
        Self { data: vec![T::zero(); layout.len()], layout }
    }

    pub fn from_parts(x: &[T], v: &[Vec<T>]) -> Self {
        let layout = Layout::new(x.len(), v.iter().map(Vec::len));
        let mut data = x.to_vec();
        v.iter().for_each(|vi| data.extend_from_slice(vi));
        Self { data, layout }
    }

    pub fn from_flat(data: Vec<T>, layout: Layout) -> Result<Self> {
        check_dim(layout.len(), data.len())?;
        Ok(Self { data, layout })
    }

    pub fn x(&self) -> &[T] {
        &self.data[self.layout.primal()]
    }

    pub fn v(&self, i: usize) -> &[T] {
        &self.data[self.layout.dual(i)]
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<Vec<T>>) {
        let v = (0..self.layout.terms()).map(|i| self.v(i).to_vec()).collect();
        (self.x().to_vec(), v)
    }

    /// `||x||^2 + Σ ||v_i||^2`
    pub fn norm_sq(&self) -> T {
        norm_sq(&self.data)
    }
}

/// `J_{gamma Ã}(x, v) = (J_{gamma A} x, J_{gamma B_1^{-1}} v_1, …)`
pub struct LiftedResolvent<'p, T> {
    problem: &'p CompositeProblem<T>,
    layout: Layout,
}

impl<T: Scalar> ProxOracle<T> for LiftedResolvent<'_, T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let r = self.layout.primal();
        self.problem.resolvent.prox_to(gamma, &x[r.clone()], &mut out[r]);
        for (i, t) in self.problem.terms.iter().enumerate() {
            let r = self.layout.dual(i);
            t.inv_resolvent.prox_to(gamma, &x[r.clone()], &mut out[r]);
        }
    }
}

/// `D̃(x, v) = (Dx + Σ L_i* v_i, -L_1 x, …, -L_m x)`, never assembled.
pub struct LiftedSingle<'p, T> {
    problem: &'p CompositeProblem<T>,
    layout: Layout,
}

impl<T: Scalar> LipschitzOp<T> for LiftedSingle<'_, T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        let p = self.layout.primal();
        let primal = &x[p.clone()];
        self.problem.single.eval_to(primal, &mut out[p.clone()]);
        let mut scratch = vec![T::zero(); p.len()];
        for (i, t) in self.problem.terms.iter().enumerate() {
            let r = self.layout.dual(i);
            t.map.adjoint_to(&x[r.clone()], &mut scratch);
            for (o, &s) in out[p.clone()].iter_mut().zip(&scratch) {
                *o = *o + s;
            }
            let block = &mut out[r];
            t.map.apply_to(primal, block);
            block.iter_mut().for_each(|b| *b = -*b);
        }
    }

    fn lipschitz(&self) -> T {
        self.problem.lifted_lipschitz()
    }
}

/// `B̃(x, v) = (Bx, 0, …, 0)`
pub struct LiftedPenalty<'p, T> {
    problem: &'p CompositeProblem<T>,
    layout: Layout,
}

impl<T: Scalar> LipschitzOp<T> for LiftedPenalty<'_, T> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        let p = self.layout.primal();
        self.problem.penalty.eval_to(&x[p.clone()], &mut out[p.clone()]);
        out[p.end..].iter_mut().for_each(|o| *o = T::zero());
    }

    fn lipschitz(&self) -> T {
        self.problem.penalty.lipschitz()
    }
}

pub type LiftedProblem<'p, T> = PenaltyProblem<T, LiftedResolvent<'p, T>, LiftedSingle<'p, T>, LiftedPenalty<'p, T>>;

/// The lifted `(Ã, D̃, B̃)` as an ordinary penalty problem on the flat space.
pub fn lift_problem<T: Scalar>(c: &CompositeProblem<T>) -> Result<LiftedProblem<'_, T>> {
    let layout = c.layout();
    PenaltyProblem::new(
        LiftedResolvent { problem: c, layout: layout.clone() },
        LiftedSingle { problem: c, layout: layout.clone() },
        LiftedPenalty { problem: c, layout },
    )
}

/// Componentwise resolvent of the lifted operator at `pt`.
pub fn resolvent_product<T: Scalar>(
    lambda: T,
    a: &dyn ProxOracle<T>,
    inv_terms: &[&dyn ProxOracle<T>],
    pt: &LiftedPoint<T>,
) -> Result<LiftedPoint<T>> {
    if !(lambda > T::zero()) {
        return Err(param(format!("resolvent step must be positive, got {lambda}")));
    }
    if inv_terms.len() != pt.layout.terms() {
        return Err(param(format!("{} resolvents for {} dual blocks", inv_terms.len(), pt.layout.terms())));
    }
    check_dim(a.dim(), pt.x().len())?;
    let mut out = LiftedPoint::zeros(pt.layout.clone());
    let r = pt.layout.primal();
    a.prox_to(lambda, pt.x(), &mut out.data[r]);
    for (i, t) in inv_terms.iter().enumerate() {
        let r = pt.layout.dual(i);
        check_dim(t.dim(), r.len())?;
        t.prox_to(lambda, pt.v(i), &mut out.data[r]);
    }
    Ok(out)
}

/// Runs the lifted problem. Rows, iterates and averages are lifted vectors;
/// the primal trace is `layout.primal()` of each.
pub fn alg3_run<T: Scalar>(
    c: &CompositeProblem<T>,
    s: &PolySchedule,
    init: &LiftedPoint<T>,
    opts: &RunOptions,
) -> Result<RunRecord<T>, RunError<T>> {
    alg3_run_monitored(c, s, init, opts, &mut NoMonitor)
}

pub fn alg3_run_monitored<T: Scalar, M: Monitor<T> + ?Sized>(
    c: &CompositeProblem<T>,
    s: &PolySchedule,
    init: &LiftedPoint<T>,
    opts: &RunOptions,
    monitor: &mut M,
) -> Result<RunRecord<T>, RunError<T>> {
    let fail = |error| RunError {
        error,
        partial: RunRecord {
            algorithm: opts.algorithm,
            rows: Vec::new(),
            x: init.data.clone(),
            y: init.data.clone(),
            z: init.data.clone(),
            tau: T::zero(),
            converged: false,
            history: None,
        },
    };
    if init.layout != c.layout() {
        return Err(fail(param("initial point does not match the problem layout")));
    }
    let lifted = lift_problem(c).map_err(fail)?;
    run_monitored(&lifted, s, &init.data, None, opts, monitor)
}

/// A composed term `g_i(L_i x)`.
pub type ProxTerm<T> = (Box<dyn ProxOracle<T>>, Box<dyn LinearMap<T>>);

/// Builds the lifted data for `min f(x) + Σ g_i(L_i x) + h(x)` over
/// `argmin Ψ`: `A = ∂f`, `D = ∇h`, `B = ∇Ψ`, `B_i = ∂g_i`. The dual
/// resolvents are `prox_{gamma g_i*}` via the Moreau decomposition.
pub fn alg4_build<T: Scalar + 'static>(
    f: Box<dyn ProxOracle<T>>,
    h_grad: Box<dyn LipschitzOp<T>>,
    psi_grad: Box<dyn LipschitzOp<T>>,
    terms: Vec<ProxTerm<T>>,
) -> Result<CompositeProblem<T>> {
    let mut c = CompositeProblem::new(f, h_grad, psi_grad)?;
    for (g, l) in terms {
        c = c.with_term(Box::new(ConjugateProx(g)), l)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{DenseMatrix, Identity, ScaledIdentityResolvent, ZeroOp, ZeroProx};

    fn scalar_id() -> Box<dyn ProxOracle<f64>> {
        Box::new(ScaledIdentityResolvent { dim: 1, a: 1.0 })
    }

    #[test]
    fn layout_offsets() {
        let l = Layout::new(3, [2, 4]);
        assert_eq!(l.len(), 9);
        assert_eq!(l.primal(), 0..3);
        assert_eq!(l.dual(0), 3..5);
        assert_eq!(l.dual(1), 5..9);
    }

    #[test]
    fn round_trip() {
        let p = LiftedPoint::from_parts(&[1.0, 2.0], &[vec![3.0], vec![4.0, 5.0]]);
        assert_eq!(p.norm_sq(), 55.0);
        let (x, v) = p.clone().into_parts();
        assert_eq!(LiftedPoint::from_parts(&x, &v), p);
    }

    #[test]
    fn lifted_constant_adds_norms() {
        let l1 = DenseMatrix::from_rows(&[vec![3.0]]).unwrap();
        let l2 = DenseMatrix::from_rows(&[vec![4.0]]).unwrap();
        let d = crate::ops::FnOp::new(1, 2.0, |x: &[f64], o: &mut [f64]| o[0] = 2.0 * x[0]);
        let c = CompositeProblem::new(Box::new(ZeroProx(1)), Box::new(d), Box::new(ZeroOp(1)))
            .unwrap()
            .with_term(Box::new(ZeroProx(1)), Box::new(l1))
            .unwrap()
            .with_term(Box::new(ZeroProx(1)), Box::new(l2))
            .unwrap();
        assert_eq!(c.lifted_lipschitz(), 7.0);
        assert_eq!(lift_problem(&c).unwrap().eta(), 1.0 / 7.0);
    }

    #[test]
    fn unit_term_constant() {
        let c: CompositeProblem<f64> = CompositeProblem::new(Box::new(ZeroProx(1)), Box::new(ZeroOp(1)), Box::new(ZeroOp(1)))
            .unwrap()
            .with_term(Box::new(ZeroProx(1)), Box::new(Identity(1)))
            .unwrap();
        assert_eq!(c.lifted_lipschitz(), 1.0);
    }

    #[test]
    fn componentwise_resolvent() {
        let pt = LiftedPoint::from_parts(&[2.0], &[vec![4.0]]);
        let a = ScaledIdentityResolvent { dim: 1, a: 1.0 };
        let out = resolvent_product(1.0, &a, &[&a], &pt).unwrap();
        assert_eq!(out.data, vec![1.0, 2.0]);
        let ident = resolvent_product(0.7, &ZeroProx(1), &[&ZeroProx(1)], &pt).unwrap();
        assert_eq!(ident, pt);
        let bare = LiftedPoint::from_parts(&[2.0], &[]);
        assert_eq!(resolvent_product(1.0, &a, &[], &bare).unwrap().data, vec![1.0]);
    }

    #[test]
    fn lifted_single_applies_blocks() {
        let l = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let c = CompositeProblem::new(Box::new(ZeroProx(2)), Box::new(ZeroOp(2)), Box::new(ZeroOp(2)))
            .unwrap()
            .with_term(Box::new(ZeroProx(1)), Box::new(l))
            .unwrap();
        let lp = lift_problem(&c).unwrap();
        assert_eq!(lp.single.eval(&[1.0, 1.0, 2.0]), vec![2.0, 4.0, -3.0]);
        assert_eq!(lp.penalty.eval(&[1.0, 1.0, 2.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_mismatched_terms() {
        let c = CompositeProblem::new(scalar_id(), Box::new(ZeroOp(1)), Box::new(ZeroOp(1))).unwrap();
        assert!(c.with_term(Box::new(ZeroProx(2)), Box::new(Identity(1))).is_err());
        let c = CompositeProblem::new(scalar_id(), Box::new(ZeroOp(1)), Box::new(ZeroOp(1))).unwrap();
        let zero = DenseMatrix::new(1, 1, vec![0.0]).unwrap();
        assert!(c.with_term(Box::new(ZeroProx(1)), Box::new(zero)).is_err());
        assert!(CompositeProblem::new(scalar_id(), Box::new(ZeroOp(2)), Box::new(ZeroOp(1))).is_err());
    }
}
