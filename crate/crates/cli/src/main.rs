mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fbfep_core::splitting::Algorithm;
use fbfep_core::PolySchedule;

use config::{CommandConfig, Common, Document, InpaintConfig, MinimaxConfig, MinimaxPreset, ScheduleConfig, ScheduleChoice, Size};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "fbfep", version, about = "Penalty-scheme forward-backward-forward experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Output directory (created if missing)
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    iters: Option<usize>,
    /// fbf | fbf_ep
    #[arg(long, global = true, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Keep every iterate and write history.csv
    #[arg(long, global = true)]
    record_history: bool,
    /// JSON config; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// TV inpainting of a grayscale image
    Inpaint {
        /// Clean source image (PGM)
        #[arg(long)]
        image: Option<PathBuf>,
        /// Generated source, ROWSxCOLS
        #[arg(long, value_parser = parse_size)]
        synthetic: Option<Size>,
        #[arg(long)]
        missing_ratio: Option<f64>,
    },
    /// Affine monotone inclusion under a linear-constraint penalty (needs --config)
    RunInclusion,
    /// Constrained convex-concave quadratic saddle problem
    Minimax {
        /// bilinear_toy | constrained_quadratic
        #[arg(long, value_parser = parse_preset)]
        preset: Option<MinimaxPreset>,
    },
    /// Check a step-size schedule against the convergence conditions
    ValidateSchedule {
        #[arg(long, requires_all = ["a", "d", "e"])]
        c: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        e: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Omit for a zero single-valued operator
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run the reference cross-checks
    Selftest,
    /// Run whatever command the config names
    Run { config: PathBuf },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: fbfep_core::Error| e.to_string())
}

fn parse_size(s: &str) -> Result<Size, String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or("expected ROWSxCOLS")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok(Size { rows: parse(r)?, cols: parse(c)? })
}

fn parse_preset(s: &str) -> Result<MinimaxPreset, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl GlobalArgs {
    fn common(&self) -> Common {
        Common {
            iters: self.iters,
            algorithm: self.algorithm,
            seed: self.seed,
            schedule: None,
            record_history: self.record_history.then_some(true),
            outdir: self.outdir.clone(),
        }
    }
}

fn load(path: Option<&Path>, expected: &str) -> CliResult<Option<Document>> {
    let Some(path) = path else { return Ok(None) };
    let doc = config::load(path)?;
    if doc.command.name() != expected {
        return Err(CliError::Config(format!(
            "config is for `{}`, not `{expected}`",
            doc.command.name()
        )));
    }
    Ok(Some(doc))
}

/// Merges config and flags into one document.
fn assemble(cli: Cli) -> CliResult<Document> {
    let flags = cli.global.common();
    let path = cli.global.config.as_deref();
    let cwd = PathBuf::new();
    let mut doc = match cli.command {
        Cmd::Run { config } => config::load(&config)?,
        Cmd::Inpaint { image, synthetic, missing_ratio } => {
            let base = load(path, "inpaint")?;
            let (common, base_dir, mut cfg) = match base {
                Some(Document { common, base_dir, command: CommandConfig::Inpaint(c) }) => (common, base_dir, c),
                _ => (Common::default(), cwd.clone(), InpaintConfig::default()),
            };
            if image.is_some() || synthetic.is_some() {
                cfg.corrupted = None;
                cfg.image = None;
                cfg.synthetic = None;
            }
            // Flag paths are relative to the working directory.
            cfg.image = image.map(|p| std::path::absolute(&p).unwrap_or(p)).or(cfg.image);
            cfg.synthetic = synthetic.or(cfg.synthetic);
            cfg.missing_ratio = missing_ratio.or(cfg.missing_ratio);
            Document { common, base_dir, command: CommandConfig::Inpaint(cfg) }
        }
        Cmd::RunInclusion => load(path, "run-inclusion")?
            .ok_or_else(|| CliError::Config("run-inclusion needs --config".into()))?,
        Cmd::Minimax { preset } => {
            let (common, base_dir, mut cfg) = match load(path, "minimax")? {
                Some(Document { common, base_dir, command: CommandConfig::Minimax(c) }) => (common, base_dir, c),
                _ => (Common::default(), cwd.clone(), MinimaxConfig::default()),
            };
            if preset.is_some() {
                cfg.preset = preset;
            }
            if cfg.preset.is_none() && cfg.q.is_none() {
                cfg.preset = Some(MinimaxPreset::BilinearToy);
            }
            Document { common, base_dir, command: CommandConfig::Minimax(cfg) }
        }
        Cmd::ValidateSchedule { c, a, d, e, mu, eta, horizon } => {
            let (mut common, base_dir, cfg) = match load(path, "validate-schedule")? {
                Some(Document { common, base_dir, command: CommandConfig::ValidateSchedule(c) }) => {
                    (common, base_dir, Some(c))
                }
                _ => (Common::default(), cwd.clone(), None),
            };
            if let (Some(c), Some(a), Some(d), Some(e)) = (c, a, d, e) {
                common.schedule = Some(ScheduleChoice::Params(PolySchedule { c, a, d, e }));
            }
            let mu = mu
                .or(cfg.as_ref().map(|c| c.mu))
                .ok_or_else(|| CliError::Config("validate-schedule needs `mu`".into()))?;
            let cfg = ScheduleConfig {
                mu,
                eta: eta.or(cfg.as_ref().and_then(|c| c.eta)),
                horizon: horizon.or(cfg.as_ref().and_then(|c| c.horizon)),
            };
            Document { common, base_dir, command: CommandConfig::ValidateSchedule(cfg) }
        }
        Cmd::Selftest => Document { common: Common::default(), base_dir: cwd, command: CommandConfig::Selftest },
    };
    doc.common = std::mem::take(&mut doc.common).overlay(flags);
    Ok(doc)
}

fn execute(doc: Document) -> CliResult<()> {
    let settings = doc.common.clone().settings()?;
    match &doc.command {
        CommandConfig::Inpaint(cfg) => {
            let job = commands::inpaint::InpaintJob::from_config(cfg, |p| doc.resolve(p))?;
            commands::inpaint::run(&job, &settings)
        }
        CommandConfig::RunInclusion(cfg) => commands::inclusion::run(cfg, &settings),
        CommandConfig::Minimax(cfg) => commands::minimax::run(cfg, &settings),
        CommandConfig::ValidateSchedule(cfg) => commands::schedule::run(cfg, &settings),
        CommandConfig::Selftest => commands::selftest::run_checks(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match assemble(cli).and_then(execute) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
