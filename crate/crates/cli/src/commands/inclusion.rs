use fbfep_core::instances::AffineInclusion;
use fbfep_core::ops::LinearMap;
use fbfep_core::oracle::AffineMap;
use fbfep_core::splitting::{lyapunov_check, run_monitored, DistanceTo, LyapunovReport, Monitor, NoMonitor, RunOptions};
use fbfep_core::vecops::{dist, norm};
use serde::Serialize;

use crate::commands::{default_schedule, dense, flush_run, report_schedule, REPORT_HORIZON};
use crate::config::{AffineData, InclusionConfig, Settings};
use crate::error::{invalid, CliError, CliResult};
use crate::output::{write_json, OutDir};

/// Largest instance handed to the dense reference solver.
pub const ORACLE_MAX_DIM: usize = 50;
const MONOTONE_SLACK: f64 = 1e-12;
/// `||A u + D u||` below this counts as a zero multiplier.
const ZERO_MULTIPLIER_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct Summary {
    algorithm: &'static str,
    iterations: usize,
    x: Vec<f64>,
    z: Vec<f64>,
    oracle: Option<Vec<f64>>,
    distance_x: Option<f64>,
    distance_z: Option<f64>,
    lyapunov: Option<LyapunovReport>,
    b_calls: u64,
    d_calls: u64,
}

fn affine(map: &AffineData, what: &str, n: usize) -> CliResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let offset = map.offset.clone().unwrap_or_else(|| vec![0.0; map.matrix.len()]);
    if map.matrix.len() != n || map.matrix.iter().any(|r| r.len() != n) || offset.len() != n {
        return Err(CliError::Config(format!("`{what}` must be {n}x{n} with an offset of length {n}")));
    }
    let modulus = AffineMap::new(&map.matrix, &offset).map_err(invalid)?.monotonicity_modulus();
    if modulus < -MONOTONE_SLACK {
        return Err(CliError::Config(format!("`{what}` is not monotone (symmetric part has eigenvalue {modulus})")));
    }
    Ok((map.matrix.clone(), offset))
}

pub fn build(cfg: &InclusionConfig) -> CliResult<AffineInclusion<f64>> {
    let n = cfg.a.matrix.len();
    if n == 0 {
        return Err(CliError::Config("`a` must be a non-empty square matrix".into()));
    }
    let (a, ca) = affine(&cfg.a, "a", n)?;
    let zero = AffineData { matrix: vec![vec![0.0; n]; n], offset: None };
    let (d, cd) = affine(cfg.d.as_ref().unwrap_or(&zero), "d", n)?;
    AffineInclusion::new(dense(&a, "a")?, ca, dense(&d, "d")?, cd, dense(&cfg.k, "k")?, cfg.b.clone())
        .map_err(|e| CliError::Config(format!("constraint: {e}")))
}

fn zero_multiplier(inst: &AffineInclusion<f64>, u: &[f64]) -> bool {
    let r: Vec<f64> = inst
        .a
        .apply(u)
        .iter()
        .zip(inst.d.apply(u))
        .zip(inst.a_offset.iter().zip(&inst.d_offset))
        .map(|((a, d), (ca, cd))| a + d + ca + cd)
        .collect();
    norm(&r) <= ZERO_MULTIPLIER_TOL
}

pub fn run(cfg: &InclusionConfig, settings: &Settings) -> CliResult<()> {
    let inst = build(cfg)?;
    let n = inst.dim();
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    if x0.len() != n {
        return Err(CliError::Config(format!("`x0` has length {}, expected {n}", x0.len())));
    }
    let problem = inst.problem().map_err(invalid)?;
    let (mu, eta) = (inst.mu(), inst.eta());

    let out = OutDir::create(settings.outdir.clone())?;
    let schedule = match settings.schedule {
        Some(s) => s,
        None => default_schedule(mu, eta)?,
    };
    report_schedule(&out, &schedule, mu, eta, REPORT_HORIZON, Some(settings.algorithm))?;

    let oracle = if n <= ORACLE_MAX_DIM {
        match inst.oracle_solution() {
            Ok(u) => Some(u),
            Err(e) => {
                eprintln!("note: no reference solution ({e})");
                None
            }
        }
    } else {
        None
    };
    let mut opts = RunOptions::new(settings.iters, settings.algorithm);
    opts.record_history = settings.record_history;
    let mut tracker = oracle.clone().map(DistanceTo);
    let monitor: &mut dyn Monitor<f64> = match tracker.as_mut() {
        Some(m) => m,
        None => &mut NoMonitor,
    };
    let rec = flush_run(&out, run_monitored(&problem, &schedule, &x0, None, &opts, monitor))?;

    let lyapunov = match (&oracle, &rec.history) {
        (Some(u), Some(_)) if zero_multiplier(&inst, u) => Some(lyapunov_check(&rec, u, mu, eta)?),
        _ => None,
    };
    let last = rec.rows.last();
    let summary = Summary {
        algorithm: settings.algorithm.name(),
        iterations: rec.iterations(),
        distance_x: oracle.as_ref().map(|u| dist(&rec.x, u)),
        distance_z: oracle.as_ref().map(|u| dist(&rec.z, u)),
        x: rec.x,
        z: rec.z,
        oracle,
        lyapunov,
        b_calls: last.map_or(0, |r| r.b_calls),
        d_calls: last.map_or(0, |r| r.d_calls),
    };
    write_json(&out.file("summary.json"), &summary)
}
