use std::path::PathBuf;

use fbfep_core::product::{alg3_run_monitored, LiftedPoint};
use fbfep_core::splitting::{Algorithm, Monitor, NoMonitor, RunOptions};
use fbfep_core::tv::*;
use fbfep_core::PolySchedule;
use serde::Serialize;

use crate::commands::{flush_run, report_schedule, REPORT_HORIZON};
use crate::config::{InpaintConfig, Settings, Size};
use crate::error::{invalid, CliError, CliResult};
use crate::output::{mask_image, read_pgm, write_json, write_pgm, OutDir};

pub const DEFAULT_MISSING_RATIO: f64 = 0.8;
pub const DEFAULT_SIZE: Size = Size { rows: 64, cols: 64 };

/// Where the observed data comes from, after resolving paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Image(PathBuf),
    Synthetic(Size),
    Corrupted { corrupted: PathBuf, mask: PathBuf },
}

#[derive(Debug, Clone)]
pub struct InpaintJob {
    pub source: Source,
    /// Explicit mask for a clean source.
    pub mask: Option<PathBuf>,
    pub missing_ratio: f64,
    pub gradient_bound: GradientBound,
}

impl InpaintJob {
    pub fn from_config(cfg: &InpaintConfig, resolve: impl Fn(&std::path::Path) -> PathBuf) -> CliResult<Self> {
        let picked = [cfg.image.is_some(), cfg.synthetic.is_some(), cfg.corrupted.is_some()];
        if picked.iter().filter(|&&p| p).count() > 1 {
            return Err(CliError::Config("give only one of `image`, `synthetic`, `corrupted`".into()));
        }
        let source = match (&cfg.image, cfg.synthetic, &cfg.corrupted) {
            (Some(p), _, _) => Source::Image(resolve(p)),
            (_, Some(size), _) => Source::Synthetic(size),
            (_, _, Some(c)) => {
                let mask = cfg
                    .mask
                    .as_ref()
                    .ok_or_else(|| CliError::Config("`corrupted` needs a `mask`".into()))?;
                Source::Corrupted { corrupted: resolve(c), mask: resolve(mask) }
            }
            _ => Source::Synthetic(DEFAULT_SIZE),
        };
        let mask = match source {
            Source::Corrupted { .. } => None,
            _ => cfg.mask.as_deref().map(&resolve),
        };
        let missing_ratio = cfg.missing_ratio.unwrap_or(DEFAULT_MISSING_RATIO);
        if !(0.0..1.0).contains(&missing_ratio) {
            return Err(CliError::Config(format!("missing_ratio must lie in [0, 1), got {missing_ratio}")));
        }
        Ok(Self { source, mask, missing_ratio, gradient_bound: cfg.gradient_bound.unwrap_or_default() })
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    algorithm: &'static str,
    rows: usize,
    cols: usize,
    missing: usize,
    iterations: usize,
    isnr_avg: Option<f64>,
    isnr_nonavg: Option<f64>,
    max_box_violation: Option<f64>,
    max_disk_violation: Option<f64>,
    b_calls: u64,
    d_calls: u64,
}

fn read_mask(path: &std::path::Path, rows: usize, cols: usize) -> CliResult<Mask> {
    let img = read_pgm(path)?;
    if (img.rows, img.cols) != (rows, cols) {
        return Err(CliError::Config(format!(
            "mask is {}x{}, image is {rows}x{cols}",
            img.rows, img.cols
        )));
    }
    Mask::new(rows, cols, img.pixels.iter().map(|&v| v > 0.5).collect()).map_err(invalid)
}

pub fn standard_schedule(alg: Algorithm) -> PolySchedule {
    match alg {
        Algorithm::FbfEp => PolySchedule::inpainting_fbf_ep(),
        Algorithm::Fbf => PolySchedule::inpainting_fbf(),
    }
}

pub fn run(job: &InpaintJob, settings: &Settings) -> CliResult<()> {
    let (clean, mask, corrupted) = match &job.source {
        Source::Corrupted { corrupted, mask } => {
            let b = read_pgm(corrupted)?;
            let mask = read_mask(mask, b.rows, b.cols)?;
            let b = corrupt(&b, &mask).map_err(invalid)?;
            (None, mask, b)
        }
        source => {
            let clean = match source {
                Source::Image(p) => read_pgm(p)?,
                Source::Synthetic(s) => synthetic_image(s.rows, s.cols).map_err(invalid)?,
                Source::Corrupted { .. } => unreachable!(),
            };
            let mask = match &job.mask {
                Some(p) => read_mask(p, clean.rows, clean.cols)?,
                None => make_mask(clean.rows, clean.cols, job.missing_ratio, settings.seed).map_err(invalid)?,
            };
            let b = corrupt(&clean, &mask).map_err(invalid)?;
            (Some(clean), mask, b)
        }
    };

    let out = OutDir::create(settings.outdir.clone())?;
    write_pgm(&out.file("mask.pgm"), &mask_image(&mask))?;
    write_pgm(&out.file("corrupted.pgm"), &corrupted)?;

    let problem = build_inpainting_problem(&corrupted, &mask, job.gradient_bound).map_err(invalid)?;
    let schedule = settings.schedule.unwrap_or_else(|| standard_schedule(settings.algorithm));
    report_schedule(&out, &schedule, 1.0, 1.0 / problem.lifted_lipschitz(), REPORT_HORIZON, Some(settings.algorithm))?;

    let n = corrupted.len();
    let init = LiftedPoint::from_parts(&corrupted.pixels, &[vec![0.0; 2 * n]]);
    let mut opts = RunOptions::new(settings.iters, settings.algorithm);
    opts.record_history = settings.record_history;

    let mut tracker = match &clean {
        Some(c) => {
            // ISNR is undefined when nothing is missing (b equals the source).
            Some(InpaintMonitor::new(c, &corrupted, problem.layout()).map_err(invalid)?)
        }
        None => {
            eprintln!("note: no clean source; isnr columns are left empty");
            None
        }
    };
    let monitor: &mut dyn Monitor<f64> = match tracker.as_mut() {
        Some(m) => m,
        None => &mut NoMonitor,
    };
    let rec = flush_run(&out, alg3_run_monitored(&problem, &schedule, &init, &opts, monitor))?;

    let primal = |v: &[f64]| Image::new(corrupted.rows, corrupted.cols, v[..n].to_vec()).map_err(invalid);
    let (avg, plain) = (primal(&rec.z)?, primal(&rec.x)?);
    write_pgm(&out.file("recon_avg.pgm"), &avg)?;
    write_pgm(&out.file("recon_nonavg.pgm"), &plain)?;

    let score = |img: &Image<f64>| clean.as_ref().and_then(|c| isnr(&c.pixels, &corrupted.pixels, &img.pixels).ok());
    let last = rec.rows.last();
    let summary = Summary {
        algorithm: settings.algorithm.name(),
        rows: corrupted.rows,
        cols: corrupted.cols,
        missing: mask.missing(),
        iterations: rec.iterations(),
        isnr_avg: score(&avg),
        isnr_nonavg: score(&plain),
        max_box_violation: tracker.as_ref().map(|t| t.max_box_violation),
        max_disk_violation: tracker.as_ref().map(|t| t.max_disk_violation),
        b_calls: last.map_or(0, |r| r.b_calls),
        d_calls: last.map_or(0, |r| r.d_calls),
    };
    write_json(&out.file("summary.json"), &summary)
}
