//! JSON experiment configs.
//!
//! A config is a single object with a `command` discriminator. The keys in
//! [`COMMON_KEYS`] are shared by every command; the rest are validated
//! against the command's own schema, and unknown keys are rejected.

use std::path::{Path, PathBuf};

use fbfep_core::splitting::Algorithm;
use fbfep_core::tv::GradientBound;
use fbfep_core::PolySchedule;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const COMMON_KEYS: [&str; 6] = ["iters", "algorithm", "seed", "schedule", "record_history", "outdir"];
pub const DEFAULT_ITERS: usize = 2000;
pub const DEFAULT_OUTDIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScheduleChoice {
    Preset(SchedulePreset),
    Params(PolySchedule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePreset {
    /// `0.9 n^{-3/4}`, `n^{3/4}`
    InpaintingFbf,
    /// `0.9 (2n)^{-3/4}`, `n^{3/4}`
    InpaintingFbfEp,
}

impl ScheduleChoice {
    pub fn resolve(self) -> CliResult<PolySchedule> {
        let s = match self {
            ScheduleChoice::Preset(SchedulePreset::InpaintingFbf) => PolySchedule::inpainting_fbf(),
            ScheduleChoice::Preset(SchedulePreset::InpaintingFbfEp) => PolySchedule::inpainting_fbf_ep(),
            ScheduleChoice::Params(s) => s,
        };
        s.validate().map_err(crate::error::invalid)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    pub iters: Option<usize>,
    pub algorithm: Option<Algorithm>,
    pub seed: Option<u64>,
    pub schedule: Option<ScheduleChoice>,
    pub record_history: Option<bool>,
    pub outdir: Option<PathBuf>,
}

impl Common {
    /// Fields set in `other` win.
    pub fn overlay(self, other: Common) -> Common {
        Common {
            iters: other.iters.or(self.iters),
            algorithm: other.algorithm.or(self.algorithm),
            seed: other.seed.or(self.seed),
            schedule: other.schedule.or(self.schedule),
            record_history: other.record_history.or(self.record_history),
            outdir: other.outdir.or(self.outdir),
        }
    }

    pub fn settings(self) -> CliResult<Settings> {
        let iters = self.iters.unwrap_or(DEFAULT_ITERS);
        if iters == 0 {
            return Err(CliError::Config("iters must be at least 1".into()));
        }
        Ok(Settings {
            iters,
            algorithm: self.algorithm.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
            schedule: self.schedule.map(ScheduleChoice::resolve).transpose()?,
            record_history: self.record_history.unwrap_or(false),
            outdir: self.outdir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTDIR)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub iters: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// `None` lets the command pick its default.
    pub schedule: Option<PolySchedule>,
    pub record_history: bool,
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InpaintConfig {
    /// Clean source image; masked with `missing_ratio` and `seed`.
    pub image: Option<PathBuf>,
    /// Generated piecewise-constant source instead of `image`.
    pub synthetic: Option<Size>,
    /// Already corrupted data (requires `mask`); no ISNR without a clean source.
    pub corrupted: Option<PathBuf>,
    /// PGM mask, nonzero = observed. Overrides the generated mask.
    pub mask: Option<PathBuf>,
    pub missing_ratio: Option<f64>,
    pub gradient_bound: Option<GradientBound>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineData {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Option<Vec<f64>>,
}

/// `0 ∈ A x + D x + N_{Kx=b}(x)` with affine monotone `A`, `D`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionConfig {
    pub a: AffineData,
    pub d: Option<AffineData>,
    pub k: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaxPreset {
    BilinearToy,
    ConstrainedQuadratic,
}

/// `f(x, y) = 1/2 x'Px + x'Qy - 1/2 y'Ry + px'x - ry'y` on boxes, with
/// `K1 x = b1`, `K2 y = b2`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxConfig {
    pub preset: Option<MinimaxPreset>,
    pub p: Option<Vec<Vec<f64>>>,
    pub q: Option<Vec<Vec<f64>>>,
    pub r: Option<Vec<Vec<f64>>>,
    pub px: Option<Vec<f64>>,
    pub ry: Option<Vec<f64>>,
    pub x_box: Option<[f64; 2]>,
    pub y_box: Option<[f64; 2]>,
    pub k1: Option<Vec<Vec<f64>>>,
    pub b1: Option<Vec<f64>>,
    pub k2: Option<Vec<Vec<f64>>>,
    pub b2: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub mu: f64,
    pub eta: Option<f64>,
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum CommandConfig {
    Inpaint(InpaintConfig),
    RunInclusion(InclusionConfig),
    Minimax(MinimaxConfig),
    ValidateSchedule(ScheduleConfig),
    Selftest,
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Inpaint(_) => "inpaint",
            CommandConfig::RunInclusion(_) => "run-inclusion",
            CommandConfig::Minimax(_) => "minimax",
            CommandConfig::ValidateSchedule(_) => "validate-schedule",
            CommandConfig::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    pub common: Common,
    pub command: CommandConfig,
    /// Relative paths inside the config resolve against this directory.
    pub base_dir: PathBuf,
}

impl Document {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub fn load(path: &Path) -> CliResult<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingInput(format!("config {}", path.display())),
        _ => CliError::io(path, e),
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, base)
}

fn bad(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

fn body<T: DeserializeOwned>(rest: Map<String, Value>) -> CliResult<T> {
    serde_json::from_value(Value::Object(rest)).map_err(bad)
}

pub fn parse(text: &str, base_dir: PathBuf) -> CliResult<Document> {
    let value: Value = serde_json::from_str(text).map_err(bad)?;
    let Value::Object(mut obj) = value else {
        return Err(bad("config must be a JSON object"));
    };
    let command = match obj.remove("command") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(bad("`command` must be a string")),
        None => return Err(bad("missing `command`")),
    };
    let mut common = Map::new();
    for key in COMMON_KEYS {
        if let Some(v) = obj.remove(key) {
            common.insert(key.to_string(), v);
        }
    }
    let common: Common = body(common)?;
    let command = match command.replace('_', "-").as_str() {
        "inpaint" => CommandConfig::Inpaint(body(obj)?),
        "run-inclusion" => CommandConfig::RunInclusion(body(obj)?),
        "minimax" => CommandConfig::Minimax(body(obj)?),
        "validate-schedule" => CommandConfig::ValidateSchedule(body(obj)?),
        "selftest" => {
            if let Some(k) = obj.keys().next() {
                return Err(bad(format!("unknown field `{k}` for selftest")));
            }
            CommandConfig::Selftest
        }
        other => return Err(bad(format!("unknown command `{other}`"))),
    };
    Ok(Document { common, command, base_dir })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> CliResult<Document> {
        parse(text, PathBuf::new())
    }

    #[test]
    fn inpaint_example() {
        let d = doc(r#"{"command": "inpaint", "image": "lena64.pgm", "missing_ratio": 0.8, "seed": 7,
            "algorithm": "fbf_ep", "schedule": {"c": 0.9, "a": 0.75, "d": 2, "e": 0.75}, "iters": 2000}"#)
        .unwrap();
        let CommandConfig::Inpaint(c) = &d.command else { panic!() };
        assert_eq!(c.missing_ratio, Some(0.8));
        let s = d.common.settings().unwrap();
        assert_eq!((s.iters, s.seed, s.algorithm), (2000, 7, Algorithm::FbfEp));
        assert_eq!(s.schedule, Some(PolySchedule::inpainting_fbf_ep()));
    }

    #[test]
    fn zero_iterations_rejected() {
        let d = doc(r#"{"command": "inpaint", "iters": 0}"#).unwrap();
        assert_eq!(d.common.settings().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn unknown_keys_and_commands_rejected() {
        assert!(doc(r#"{"command": "inpaint", "imgae": "x.pgm"}"#).is_err());
        assert!(doc(r#"{"command": "train"}"#).is_err());
        assert!(doc(r#"{"image": "x.pgm"}"#).is_err());
        assert!(doc(r#"[1, 2]"#).is_err());
        assert!(doc(r#"{"command": "selftest", "x": 1}"#).is_err());
    }

    #[test]
    fn schedule_presets_and_underscored_names() {
        let d = doc(r#"{"command": "validate_schedule", "schedule": "inpainting_fbf_ep", "mu": 1}"#).unwrap();
        assert_eq!(d.command.name(), "validate-schedule");
        assert_eq!(d.common.settings().unwrap().schedule, Some(PolySchedule::inpainting_fbf_ep()));
        let bad = doc(r#"{"command": "selftest", "schedule": {"c": -1, "a": 0.75, "d": 1, "e": 0.75}}"#).unwrap();
        assert!(bad.common.settings().is_err());
    }

    #[test]
    fn overlay_prefers_the_override() {
        let base = Common { iters: Some(10), seed: Some(1), ..Common::default() };
        let over = Common { seed: Some(2), ..Common::default() };
        let s = base.overlay(over).settings().unwrap();
        assert_eq!((s.iters, s.seed), (10, 2));
    }
}
