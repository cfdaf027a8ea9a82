//! Per-iteration energy inequality of the extrapolated scheme, specialized to
//! a reference zero `u` with `B(u) = 0` (normal-cone element `p = 0`).

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::vecops::dist_sq;
use crate::Scalar;

use super::{History, RunRecord};

/// Absolute slack allowed on each inequality.
pub const LYAPUNOV_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    /// Steps where `M_n <= 1/2` and the inequality was tested.
    pub checked: usize,
    /// Steps skipped because `M_n > 1/2`.
    pub skipped: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    /// Largest `lhs - rhs` seen (negative when every check holds strictly).
    pub max_excess: f64,
}

impl LyapunovReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn history<T>(record: &RunRecord<T>) -> Result<&History<T>> {
    record
        .history
        .as_ref()
        .ok_or_else(|| Error::Usage("Lyapunov diagnostics need a run with record_history".into()))
}

fn m_coeff(lambda: f64, beta: f64, mu: f64, eta: f64) -> f64 {
    lambda * beta / mu + lambda / eta
}

fn check_constants(mu: f64, eta: f64) -> Result<()> {
    if mu > 0.0 && eta > 0.0 && !mu.is_nan() && !eta.is_nan() {
        Ok(())
    } else {
        Err(param(format!("need mu, eta > 0, got ({mu}, {eta})")))
    }
}

/// `||x_n - y_{n-1}||^2` bound: `M_{n-1}^2 ||y_{n-2} - y_{n-1}||^2` for
/// `n >= 1` and `||x_0 - y_{-1}||^2` at `n = 0`.
fn carry<T: Scalar>(h: &History<T>, n: usize, mu: f64, eta: f64) -> f64 {
    if n == 0 {
        dist_sq(&h.xs[0], &h.ys[0]).as_f64()
    } else {
        let m = m_coeff(h.lambdas[n - 1], h.betas[n - 1], mu, eta);
        m * m * dist_sq(&h.ys[n - 1], &h.ys[n]).as_f64()
    }
}

/// Checks, for each step `n` with `M_n = lambda_n beta_n / mu + lambda_n / eta <= 1/2`,
///
/// `||x_{n+1}-u||^2 - ||x_n-u||^2 + (1/2 - M_n^2) ||y_{n-1}-y_n||^2 <= M_{n-1}^2 ||y_{n-2}-y_{n-1}||^2`
///
/// up to [`LYAPUNOV_SLACK`].
pub fn lyapunov_check<T: Scalar>(record: &RunRecord<T>, u: &[T], mu: f64, eta: f64) -> Result<LyapunovReport> {
    check_constants(mu, eta)?;
    let h = history(record)?;
    crate::error::check_dim(h.xs[0].len(), u.len())?;
    let mut report =
        LyapunovReport { checked: 0, skipped: 0, violations: 0, first_violation: None, max_excess: f64::NEG_INFINITY };
    for n in 0..h.lambdas.len() {
        let m = m_coeff(h.lambdas[n], h.betas[n], mu, eta);
        if m > 0.5 {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let lhs = dist_sq(&h.xs[n + 1], u).as_f64() - dist_sq(&h.xs[n], u).as_f64()
            + (0.5 - m * m) * dist_sq(&h.ys[n], &h.ys[n + 1]).as_f64();
        let rhs = carry(h, n, mu, eta);
        let excess = lhs - rhs;
        report.max_excess = report.max_excess.max(excess);
        if excess > LYAPUNOV_SLACK {
            report.violations += 1;
            report.first_violation.get_or_insert(n);
        }
    }
    Ok(report)
}

/// `E_n = ||x_n - u||^2 + M_{n-1}^2 ||y_{n-2} - y_{n-1}||^2` for `n = 0..=K`
/// (with `||x_0 - y_{-1}||^2` as the second term at `n = 0`).
pub fn fejer_energies<T: Scalar>(record: &RunRecord<T>, u: &[T], mu: f64, eta: f64) -> Result<Vec<f64>> {
    check_constants(mu, eta)?;
    let h = history(record)?;
    crate::error::check_dim(h.xs[0].len(), u.len())?;
    Ok((0..h.xs.len()).map(|n| dist_sq(&h.xs[n], u).as_f64() + carry(h, n, mu, eta)).collect())
}
