//! Forward-backward-forward splitting for `0 ∈ A x + D x + N_C(x)` with
//! `C = zer B`, where the constraint is handled by the penalty `beta_n B`.

mod ergodic;
mod lyapunov;
mod run;
mod step;

use std::marker::PhantomData;

pub use ergodic::ErgodicAverage;
pub use lyapunov::{fejer_energies, lyapunov_check, LyapunovReport, LYAPUNOV_SLACK};
pub use run::{
    run, run_monitored, Algorithm, DistanceTo, History, IterationRow, Monitor, NoMonitor, Probe,
    RunError, RunOptions, RunRecord, StepView, DIVERGENCE_BOUND,
};
pub use step::{fbf_ep_step, fbf_step, FbfEpState, FbfState, StepInfo};

use crate::error::{check_dim, Result};
use crate::ops::{LipschitzOp, ProxOracle};
use crate::Scalar;

/// One instance of the penalized inclusion problem.
///
/// * `resolvent`: `J_{lambda A}` for the maximally monotone `A`;
/// * `single`: the monotone, `1/eta`-Lipschitz `D`;
/// * `penalty`: the monotone, `1/mu`-Lipschitz `B` whose zeros form `C`.
///
/// `zer B` being nonempty is assumed, not checked.
#[derive(Debug, Clone)]
pub struct PenaltyProblem<T, A, D, B> {
    pub resolvent: A,
    pub single: D,
    pub penalty: B,
    dim: usize,
    _scalar: PhantomData<T>,
}

impl<T, A, D, B> PenaltyProblem<T, A, D, B>
where
    T: Scalar,
    A: ProxOracle<T>,
    D: LipschitzOp<T>,
    B: LipschitzOp<T>,
{
    pub fn new(resolvent: A, single: D, penalty: B) -> Result<Self> {
        let dim = resolvent.dim();
        check_dim(dim, single.dim())?;
        check_dim(dim, penalty.dim())?;
        Ok(Self { resolvent, single, penalty, dim, _scalar: PhantomData })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `mu` such that `B` is `1/mu`-Lipschitz (infinite for `B = 0`).
    pub fn mu(&self) -> f64 {
        1.0 / self.penalty.lipschitz().as_f64()
    }

    /// `eta` such that `D` is `1/eta`-Lipschitz (infinite for `D = 0`).
    pub fn eta(&self) -> f64 {
        1.0 / self.single.lipschitz().as_f64()
    }
}
