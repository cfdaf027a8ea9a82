//! Step-size and penalty-parameter sequences.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::Scalar;

/// `lambda_n = c * (d n)^(-a)`, `beta_n = n^e`, for `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolySchedule {
    pub c: f64,
    pub a: f64,
    pub d: f64,
    pub e: f64,
}

impl PolySchedule {
    pub fn new(c: f64, a: f64, d: f64, e: f64) -> Result<Self> {
        let s = Self { c, a, d, e };
        s.validate()?;
        Ok(s)
    }

    /// `lambda_n = 0.9 n^{-3/4}`, `beta_n = n^{3/4}`.
    pub const fn inpainting_fbf() -> Self {
        Self { c: 0.9, a: 0.75, d: 1.0, e: 0.75 }
    }

    /// `lambda_n = 0.9 (2n)^{-3/4}`, `beta_n = n^{3/4}`.
    pub const fn inpainting_fbf_ep() -> Self {
        Self { c: 0.9, a: 0.75, d: 2.0, e: 0.75 }
    }

    pub const fn constant(lambda: f64) -> Self {
        Self { c: lambda, a: 0.0, d: 1.0, e: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.c, self.a, self.d, self.e].iter().all(|v| v.is_finite());
        if !finite || self.c <= 0.0 || self.d <= 0.0 {
            return Err(param(format!("schedule needs finite c > 0 and d > 0, got {self:?}")));
        }
        Ok(())
    }

    /// `(lambda_n, beta_n)`; the index is 1-based.
    pub fn eval(&self, n: usize) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(Error::ScheduleIndex);
        }
        let n = n as f64;
        let lambda = self.c * (self.d * n).powf(-self.a);
        let beta = n.powf(self.e);
        Ok((lambda, beta))
    }

    pub fn eval_as<T: Scalar>(&self, n: usize) -> Result<(T, T)> {
        let (l, b) = self.eval(n)?;
        Ok((T::lit(l), T::lit(b)))
    }

    /// `lambda in l^2 \ l^1`, decided by the exponent: `1/2 < a <= 1`.
    pub fn lambda_in_l2_not_l1(&self) -> bool {
        self.a > 0.5 && self.a <= 1.0
    }
}

/// Outcome of checking a schedule against the convergence conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    /// Estimate of `limsup (lambda_n beta_n / mu + lambda_n / eta)`.
    pub limsup_estimate: f64,
    pub in_l2_not_l1: bool,
    /// `limsup < 1/2`, the extrapolated scheme's condition.
    pub condition_fbf_ep: bool,
    /// `limsup < 1`, the classical scheme's condition.
    pub condition_fbf: bool,
    pub horizon: usize,
}

impl ScheduleReport {
    /// Human-readable warnings for violated conditions.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.condition_fbf_ep {
            out.push(format!(
                "limsup(lambda*beta/mu + lambda/eta) = {:.6} is not < 1/2; FBF-EP convergence is not guaranteed",
                self.limsup_estimate
            ));
        }
        if !self.condition_fbf {
            out.push(format!(
                "limsup(lambda*beta/mu + lambda/eta) = {:.6} is not < 1; FBF convergence is not guaranteed",
                self.limsup_estimate
            ));
        }
        if !self.in_l2_not_l1 {
            out.push("step sizes are not in l2 \\ l1".to_string());
        }
        out
    }
}

/// Checks `s` against the step-size conditions for a penalty operator with
/// Lipschitz constant `1/mu` and a single-valued operator with constant
/// `1/eta` (an infinite `mu` or `eta` drops that term).
///
/// When `e == a` the expression has a closed-form limit which is reported
/// exactly; otherwise the supremum over `n in [horizon/2, horizon]` is used.
pub fn validate_schedule(s: &PolySchedule, mu: f64, eta: f64, horizon: usize) -> Result<ScheduleReport> {
    s.validate()?;
    if !(mu > 0.0) {
        return Err(param(format!("mu must be positive (or infinite), got {mu}")));
    }
    if !(eta > 0.0) {
        return Err(param(format!("eta must be positive (or infinite), got {eta}")));
    }
    if horizon < 100 {
        return Err(param(format!("horizon must be at least 100, got {horizon}")));
    }
    let inv_mu = if mu.is_infinite() { 0.0 } else { 1.0 / mu };
    let inv_eta = if eta.is_infinite() { 0.0 } else { 1.0 / eta };

    let limsup = if s.e == s.a {
        // lambda_n beta_n = c d^{-a} for every n; lambda_n -> 0 iff a > 0.
        let penalty = s.c * s.d.powf(-s.a) * inv_mu;
        if s.a > 0.0 {
            penalty
        } else if s.a == 0.0 {
            penalty + s.c * inv_eta
        } else {
            f64::INFINITY
        }
    } else {
        (horizon / 2..=horizon)
            .map(|n| {
                let (l, b) = s.eval(n).expect("n >= 50");
                l * b * inv_mu + l * inv_eta
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };

    Ok(ScheduleReport {
        limsup_estimate: limsup,
        in_l2_not_l1: s.lambda_in_l2_not_l1(),
        condition_fbf_ep: limsup < 0.5,
        condition_fbf: limsup < 1.0,
        horizon,
    })
}
