//! Forward-backward-forward splitting with extrapolation from the past for
//! monotone inclusions with a penalized constraint `0 ∈ Ax + Dx + N_C(x)`,
//! `C = zer B`, plus product-space, minimax and TV-inpainting front ends.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`).

// `!(a > b)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Failed runs hand back their partial record.
#![allow(clippy::result_large_err)]

pub mod error;
pub mod instances;
pub mod minimax;
pub mod ops;
pub mod oracle;
pub mod product;
pub mod rng;
pub mod schedule;
pub mod splitting;
pub mod tv;
pub mod vecops;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use schedule::{validate_schedule, PolySchedule, ScheduleReport};
pub use splitting::{run, run_monitored, Algorithm, PenaltyProblem, RunOptions, RunRecord};

pub type RunRecordF64 = RunRecord<f64>;
pub type RunRecordF32 = RunRecord<f32>;
pub type ImageF64 = tv::Image<f64>;
pub type ImageF32 = tv::Image<f32>;
pub type CompositeProblemF64 = product::CompositeProblem<f64>;
pub type CompositeProblemF32 = product::CompositeProblem<f32>;
pub type MinimaxInstanceF64 = minimax::MinimaxInstance<f64>;
pub type MinimaxInstanceF32 = minimax::MinimaxInstance<f32>;
