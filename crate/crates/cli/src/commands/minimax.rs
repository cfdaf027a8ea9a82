use fbfep_core::instances::saddle_oracle;
use fbfep_core::minimax::{alg2_run, build_minimax_problem, saddle_residual, MinimaxInstance, QuadraticSaddle};
use fbfep_core::ops::{BoxProx, DenseMatrix};
use fbfep_core::splitting::RunOptions;
use fbfep_core::vecops::dist;
use serde::Serialize;

use crate::commands::{default_schedule, dense, flush_run, report_schedule, REPORT_HORIZON};
use crate::config::{MinimaxConfig, MinimaxPreset, Settings};
use crate::error::{invalid, CliError, CliResult};
use crate::output::{write_json, OutDir};

/// Slack for deciding that the unconstrained KKT point lies in the boxes.
const BOX_SLACK: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct Summary {
    algorithm: &'static str,
    iterations: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    zx: Vec<f64>,
    zy: Vec<f64>,
    residual_last: f64,
    residual_ergodic: f64,
    kkt: Option<Vec<f64>>,
    kkt_distance_last: Option<f64>,
    kkt_distance_ergodic: Option<f64>,
}

/// Quadratic saddle data with boxes and constraints, all explicit.
#[derive(Debug, Clone)]
pub struct SaddleData {
    pub f: QuadraticSaddle<f64>,
    pub x_box: [f64; 2],
    pub y_box: [f64; 2],
    pub k1: DenseMatrix<f64>,
    pub b1: Vec<f64>,
    pub k2: DenseMatrix<f64>,
    pub b2: Vec<f64>,
}

fn preset(p: MinimaxPreset) -> MinimaxConfig {
    let m = |rows: &[&[f64]]| Some(rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    match p {
        MinimaxPreset::BilinearToy => MinimaxConfig {
            q: m(&[&[1.0]]),
            x_box: Some([-1.0, 1.0]),
            y_box: Some([-1.0, 1.0]),
            k1: m(&[&[1.0]]),
            b1: Some(vec![0.0]),
            k2: m(&[&[1.0]]),
            b2: Some(vec![0.0]),
            ..MinimaxConfig::default()
        },
        // f = 1/2 (a'x)^2 + (a'x)(c'y) - 1/2 (c'y)^2, a = (1, -1), c = (1, 1)
        MinimaxPreset::ConstrainedQuadratic => MinimaxConfig {
            p: m(&[&[1.0, -1.0], &[-1.0, 1.0]]),
            q: m(&[&[1.0, 1.0], &[-1.0, -1.0]]),
            r: m(&[&[1.0, 1.0], &[1.0, 1.0]]),
            x_box: Some([-2.0, 2.0]),
            y_box: Some([-2.0, 2.0]),
            k1: m(&[&[1.0, 1.0]]),
            b1: Some(vec![1.0]),
            k2: m(&[&[1.0, -1.0]]),
            b2: Some(vec![1.0]),
            ..MinimaxConfig::default()
        },
    }
}

fn expand(cfg: &MinimaxConfig) -> CliResult<MinimaxConfig> {
    let Some(p) = cfg.preset else {
        return Ok(cfg.clone());
    };
    let explicit = [&cfg.p, &cfg.q, &cfg.r, &cfg.k1, &cfg.k2].iter().any(|v| v.is_some())
        || [&cfg.px, &cfg.ry, &cfg.b1, &cfg.b2].iter().any(|v| v.is_some())
        || cfg.x_box.is_some()
        || cfg.y_box.is_some();
    if explicit {
        return Err(CliError::Config("`preset` cannot be combined with explicit coefficients".into()));
    }
    Ok(MinimaxConfig { x0: cfg.x0.clone(), y0: cfg.y0.clone(), ..preset(p) })
}

fn zeros(r: usize, c: usize) -> DenseMatrix<f64> {
    DenseMatrix::new(r, c, vec![0.0; r * c]).expect("non-negative dims")
}

fn check_box(b: Option<[f64; 2]>, what: &str) -> CliResult<[f64; 2]> {
    let b = b.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    if b[0].partial_cmp(&b[1]).is_none_or(|o| o.is_gt()) {
        return Err(CliError::Config(format!("`{what}` is empty: {b:?}")));
    }
    Ok(b)
}

pub fn build(cfg: &MinimaxConfig) -> CliResult<SaddleData> {
    let cfg = expand(cfg)?;
    let q = dense(cfg.q.as_ref().ok_or_else(|| CliError::Config("minimax needs `q` or a `preset`".into()))?, "q")?;
    let (m1, m2) = (q.rows(), q.cols());
    let p = cfg.p.as_ref().map(|p| dense(p, "p")).transpose()?.unwrap_or_else(|| zeros(m1, m1));
    let r = cfg.r.as_ref().map(|r| dense(r, "r")).transpose()?.unwrap_or_else(|| zeros(m2, m2));
    let px = cfg.px.clone().unwrap_or_else(|| vec![0.0; m1]);
    let ry = cfg.ry.clone().unwrap_or_else(|| vec![0.0; m2]);
    let f = QuadraticSaddle::new(p, q, r, px, ry).map_err(|e| CliError::Config(format!("quadratic: {e}")))?;
    let constraint = |k: &Option<Vec<Vec<f64>>>, b: &Option<Vec<f64>>, cols: usize, what: &str| -> CliResult<_> {
        match (k, b) {
            (Some(k), Some(b)) => Ok((dense(k, what)?, b.clone())),
            (None, None) => Ok((zeros(1, cols), vec![0.0])),
            _ => Err(CliError::Config(format!("`{what}` and its right-hand side go together"))),
        }
    };
    let (k1, b1) = constraint(&cfg.k1, &cfg.b1, m1, "k1")?;
    let (k2, b2) = constraint(&cfg.k2, &cfg.b2, m2, "k2")?;
    Ok(SaddleData { f, x_box: check_box(cfg.x_box, "x_box")?, y_box: check_box(cfg.y_box, "y_box")?, k1, b1, k2, b2 })
}

impl SaddleData {
    pub fn instance(&self) -> CliResult<MinimaxInstance<f64>> {
        let (m1, m2) = (self.k1.cols(), self.k2.cols());
        MinimaxInstance::new(
            Box::new(self.f.clone()),
            Box::new(BoxProx::new(m1, self.x_box[0], self.x_box[1]).map_err(invalid)?),
            Box::new(BoxProx::new(m2, self.y_box[0], self.y_box[1]).map_err(invalid)?),
            (self.k1.clone(), self.b1.clone()),
            (self.k2.clone(), self.b2.clone()),
        )
        .map_err(|e| CliError::Config(format!("instance: {e}")))
    }

    /// KKT point of the equality-constrained problem, when it lies inside
    /// the boxes (so the boxes are inactive and it is the saddle point).
    pub fn kkt(&self) -> Option<Vec<f64>> {
        let u = saddle_oracle(&self.f, &self.k1, &self.b1, &self.k2, &self.b2).ok()?;
        let m1 = self.k1.cols();
        let inside = |v: &[f64], b: [f64; 2]| v.iter().all(|&t| t >= b[0] - BOX_SLACK && t <= b[1] + BOX_SLACK);
        (inside(&u[..m1], self.x_box) && inside(&u[m1..], self.y_box)).then_some(u)
    }
}

pub fn run(cfg: &MinimaxConfig, settings: &Settings) -> CliResult<()> {
    let saddle = build(cfg)?;
    let inst = saddle.instance()?;
    let (m1, m2) = inst.dims();
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.0; m1]);
    let y0 = cfg.y0.clone().unwrap_or_else(|| vec![0.0; m2]);
    if x0.len() != m1 || y0.len() != m2 {
        return Err(CliError::Config(format!("`x0`/`y0` must have lengths {m1} and {m2}")));
    }
    let problem = build_minimax_problem(&inst).map_err(invalid)?;
    let (mu, eta) = (problem.mu(), problem.eta());

    let out = OutDir::create(settings.outdir.clone())?;
    let schedule = match settings.schedule {
        Some(s) => s,
        None => default_schedule(mu, eta)?,
    };
    report_schedule(&out, &schedule, mu, eta, REPORT_HORIZON, Some(settings.algorithm))?;

    let mut opts = RunOptions::new(settings.iters, settings.algorithm);
    opts.record_history = settings.record_history;
    let rec = flush_run(&out, alg2_run(&inst, &schedule, &x0, &y0, &opts))?;

    let (x, y) = inst.split(&rec.x);
    let (zx, zy) = inst.split(&rec.z);
    let kkt = saddle.kkt();
    let summary = Summary {
        algorithm: settings.algorithm.name(),
        iterations: rec.iterations(),
        residual_last: saddle_residual(&inst, x, y)?,
        residual_ergodic: saddle_residual(&inst, zx, zy)?,
        kkt_distance_last: kkt.as_ref().map(|u| dist(&rec.x, u)),
        kkt_distance_ergodic: kkt.as_ref().map(|u| dist(&rec.z, u)),
        kkt,
        x: x.to_vec(),
        y: y.to_vec(),
        zx: zx.to_vec(),
        zy: zy.to_vec(),
    };
    write_json(&out.file("summary.json"), &summary)
}
