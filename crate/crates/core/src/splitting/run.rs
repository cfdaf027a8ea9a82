use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, param, Error};
use crate::ops::{LipschitzOp, ProxOracle};
use crate::schedule::PolySchedule;
use crate::vecops::{dist, norm};
use crate::Scalar;

use super::{fbf_ep_step, fbf_step, ErgodicAverage, FbfEpState, FbfState, PenaltyProblem, StepInfo};

/// Runs abort once `||x_n||` exceeds this bound or stops being finite.
pub const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Algorithm {
    /// Extrapolation from the past: one `B`/`D` evaluation per step.
    #[default]
    #[serde(rename = "fbf_ep")]
    FbfEp,
    /// Tseng's scheme: two `B`/`D` evaluations per step.
    #[serde(rename = "fbf")]
    Fbf,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FbfEp => "fbf_ep",
            Algorithm::Fbf => "fbf",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "fbf_ep" | "fbf-ep" => Ok(Algorithm::FbfEp),
            "fbf" => Ok(Algorithm::Fbf),
            other => Err(param(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Stop once `||x_{n+1} - x_n|| <= tol * max(1, ||x_n||)`.
    pub tol: Option<f64>,
    pub algorithm: Algorithm,
    /// Keep every `x_n` and `y_n` (needed by the Lyapunov diagnostics).
    pub record_history: bool,
    pub divergence_bound: f64,
}

impl RunOptions {
    pub fn new(max_iters: usize, algorithm: Algorithm) -> Self {
        Self { max_iters, tol: None, algorithm, record_history: false, divergence_bound: DIVERGENCE_BOUND }
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }
}

/// Metrics for step `n` (0-based); the schedule index is `n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub n: usize,
    pub lambda: f64,
    pub beta: f64,
    /// `||x_{n+1} - x_n||`
    pub dx: f64,
    /// `||y_n - y_{n-1}||`
    pub dy: f64,
    pub distance: Option<f64>,
    pub isnr_avg: Option<f64>,
    pub isnr_nonavg: Option<f64>,
    pub b_calls: u64,
    pub d_calls: u64,
    pub resolvent_calls: u64,
    pub wall_ms: f64,
}

/// Full iterate history: `xs[k] = x_k` for `k = 0..=K` and `ys[k] = y_{k-1}`
/// for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct History<T> {
    pub xs: Vec<Vec<T>>,
    pub ys: Vec<Vec<T>>,
    pub lambdas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T> {
    pub algorithm: Algorithm,
    pub rows: Vec<IterationRow>,
    /// Last iterate `x_K`.
    pub x: Vec<T>,
    /// Last trial point `y_{K-1}`.
    pub y: Vec<T>,
    /// Ergodic average `z_{K-1}` over `x_0, ..., x_{K-1}`.
    pub z: Vec<T>,
    pub tau: T,
    pub converged: bool,
    pub history: Option<History<T>>,
}

impl<T: Scalar> RunRecord<T> {
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone)]
pub struct RunError<T> {
    pub error: Error,
    pub partial: RunRecord<T>,
}

impl<T: Scalar> std::fmt::Display for RunError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.partial.rows.len())
    }
}

impl<T: Scalar> std::error::Error for RunError<T> {}

/// What a monitor sees after step `n`.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a, T> {
    pub n: usize,
    pub lambda: T,
    pub beta: T,
    /// `x_{n+1}`
    pub x: &'a [T],
    /// `y_n`
    pub y: &'a [T],
    /// `z_n`
    pub z: &'a [T],
}

/// Optional per-row metrics supplied by a [`Monitor`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Probe {
    pub distance: Option<f64>,
    pub isnr_avg: Option<f64>,
    pub isnr_nonavg: Option<f64>,
}

pub trait Monitor<T> {
    fn observe(&mut self, view: &StepView<'_, T>) -> Probe;
}

impl<T, F: FnMut(&StepView<'_, T>) -> Probe> Monitor<T> for F {
    fn observe(&mut self, view: &StepView<'_, T>) -> Probe {
        self(view)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoMonitor;

impl<T> Monitor<T> for NoMonitor {
    fn observe(&mut self, _view: &StepView<'_, T>) -> Probe {
        Probe::default()
    }
}

/// Records `||x_{n+1} - u||` in the `distance` column.
#[derive(Debug, Clone)]
pub struct DistanceTo<T>(pub Vec<T>);

impl<T: Scalar> Monitor<T> for DistanceTo<T> {
    fn observe(&mut self, view: &StepView<'_, T>) -> Probe {
        Probe { distance: Some(dist(view.x, &self.0).as_f64()), ..Probe::default() }
    }
}

enum Engine<T> {
    Ep(FbfEpState<T>),
    Classic(FbfState<T>),
}

impl<T: Scalar> Engine<T> {
    fn x(&self) -> &[T] {
        match self {
            Engine::Ep(s) => &s.x,
            Engine::Classic(s) => &s.x,
        }
    }

    fn y(&self) -> &[T] {
        match self {
            Engine::Ep(s) => &s.y_prev,
            Engine::Classic(s) => &s.y_prev,
        }
    }

    fn calls(&self) -> (u64, u64, u64) {
        match self {
            Engine::Ep(s) => (s.b_calls, s.d_calls, s.resolvent_calls),
            Engine::Classic(s) => (s.b_calls, s.d_calls, s.resolvent_calls),
        }
    }

    fn step<A, D, B>(&mut self, p: &PenaltyProblem<T, A, D, B>, lambda: T, beta: T) -> Result<StepInfo<T>, Error>
    where
        A: ProxOracle<T>,
        D: LipschitzOp<T>,
        B: LipschitzOp<T>,
    {
        match self {
            Engine::Ep(s) => fbf_ep_step(p, s, lambda, beta),
            Engine::Classic(s) => fbf_step(p, s, lambda, beta),
        }
    }
}

/// Runs the chosen scheme from `x0` (and `y_{-1} = y_init`, default `x0`).
pub fn run<T, A, D, B>(
    p: &PenaltyProblem<T, A, D, B>,
    schedule: &PolySchedule,
    x0: &[T],
    y_init: Option<&[T]>,
    opts: &RunOptions,
) -> Result<RunRecord<T>, RunError<T>>
where
    T: Scalar,
    A: ProxOracle<T>,
    D: LipschitzOp<T>,
    B: LipschitzOp<T>,
{
    run_monitored(p, schedule, x0, y_init, opts, &mut NoMonitor)
}

/// [`run`] with a monitor called after every step.
pub fn run_monitored<T, A, D, B, M>(
    p: &PenaltyProblem<T, A, D, B>,
    schedule: &PolySchedule,
    x0: &[T],
    y_init: Option<&[T]>,
    opts: &RunOptions,
    monitor: &mut M,
) -> Result<RunRecord<T>, RunError<T>>
where
    T: Scalar,
    A: ProxOracle<T>,
    D: LipschitzOp<T>,
    B: LipschitzOp<T>,
    M: Monitor<T> + ?Sized,
{
    let empty = |error: Error| RunError {
        error,
        partial: RunRecord {
            algorithm: opts.algorithm,
            rows: Vec::new(),
            x: x0.to_vec(),
            y: y_init.unwrap_or(x0).to_vec(),
            z: x0.to_vec(),
            tau: T::zero(),
            converged: false,
            history: None,
        },
    };
    if opts.max_iters == 0 {
        return Err(empty(param("max_iters must be at least 1")));
    }
    if let Err(e) = schedule.validate().and_then(|_| check_dim(p.dim(), x0.len())) {
        return Err(empty(e));
    }
    let engine = match opts.algorithm {
        Algorithm::FbfEp => FbfEpState::new(p, x0, y_init).map(Engine::Ep),
        Algorithm::Fbf => FbfState::new(p.dim(), x0, y_init).map(Engine::Classic),
    };
    let mut engine = match engine {
        Ok(e) => e,
        Err(e) => return Err(empty(e)),
    };

    let started = Instant::now();
    let mut avg = ErgodicAverage::new(p.dim());
    let mut rows = Vec::with_capacity(opts.max_iters);
    let mut history = opts.record_history.then(|| History {
        xs: vec![x0.to_vec()],
        ys: vec![engine.y().to_vec()],
        lambdas: Vec::new(),
        betas: Vec::new(),
    });
    let mut converged = false;
    let mut failure = None;

    for n in 0..opts.max_iters {
        let (lambda, beta) = match schedule.eval(n + 1) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let (lam_t, beta_t) = (T::lit(lambda), T::lit(beta));
        if let Err(e) = avg.update(engine.x(), lam_t) {
            failure = Some(e);
            break;
        }
        let x_norm = norm(engine.x()).as_f64();
        let info = match engine.step(p, lam_t, beta_t) {
            Ok(info) => info,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let probe = monitor.observe(&StepView {
            n,
            lambda: lam_t,
            beta: beta_t,
            x: engine.x(),
            y: engine.y(),
            z: avg.z(),
        });
        let (b_calls, d_calls, resolvent_calls) = engine.calls();
        rows.push(IterationRow {
            n,
            lambda,
            beta,
            dx: info.dx.as_f64(),
            dy: info.dy.as_f64(),
            distance: probe.distance,
            isnr_avg: probe.isnr_avg,
            isnr_nonavg: probe.isnr_nonavg,
            b_calls,
            d_calls,
            resolvent_calls,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if let Some(h) = history.as_mut() {
            h.xs.push(engine.x().to_vec());
            h.ys.push(engine.y().to_vec());
            h.lambdas.push(lambda);
            h.betas.push(beta);
        }
        let size = norm(engine.x()).as_f64();
        if !(size <= opts.divergence_bound) {
            failure = Some(Error::Divergence { iteration: n });
            break;
        }
        if let Some(tol) = opts.tol {
            if info.dx.as_f64() <= tol * x_norm.max(1.0) {
                converged = true;
                break;
            }
        }
    }

    let (z, tau) = avg.into_parts();
    let record = RunRecord {
        algorithm: opts.algorithm,
        rows,
        x: engine.x().to_vec(),
        y: engine.y().to_vec(),
        z,
        tau,
        converged,
        history,
    };
    match failure {
        None => Ok(record),
        Some(error) => Err(RunError { error, partial: record }),
    }
}
