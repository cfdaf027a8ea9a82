//! Artifact I/O: PGM images, metrics CSV, JSON reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fbfep_core::splitting::{History, IterationRow};
use fbfep_core::tv::{Image, Mask};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const METRICS_HEADER: [&str; 9] =
    ["iter", "lambda", "beta", "isnr_avg", "isnr_nonavg", "residual", "b_calls", "d_calls", "wall_ms"];

/// 17 significant digits, round-trippable.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn read_pgm(path: &Path) -> CliResult<Image<f64>> {
    if !path.is_file() {
        return Err(CliError::MissingInput(format!("image {}", path.display())));
    }
    let decoded = ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?
        .decode()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (cols, rows) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect(),
        DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect(),
        other => {
            return Err(CliError::Config(format!(
                "{}: only grayscale images are supported, got {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    Image::new(rows, cols, pixels).map_err(crate::error::invalid)
}

/// Values are clamped to `[0, 1]` and quantized to 8 bits (binary P5).
pub fn write_pgm(path: &Path, img: &Image<f64>) -> CliResult<()> {
    let data: Vec<u8> = img.pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let mut w = create(path)?;
    PnmEncoder::new(&mut w)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&data, img.cols as u32, img.rows as u32, ExtendedColorType::L8)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn mask_image(mask: &Mask) -> Image<f64> {
    let pixels = mask.observed.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect();
    Image::new(mask.rows, mask.cols, pixels).expect("mask dimensions are consistent")
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(path)?))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("{}: {e}", path.display()))
}

/// One row per iteration; `residual` is `||x_{n+1} - x_n||`.
pub fn write_metrics(path: &Path, rows: &[IterationRow]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    w.write_record(METRICS_HEADER).map_err(&err)?;
    for r in rows {
        w.write_record([
            (r.n + 1).to_string(),
            real(r.lambda),
            real(r.beta),
            opt_real(r.isnr_avg),
            opt_real(r.isnr_nonavg),
            real(r.dx),
            r.b_calls.to_string(),
            r.d_calls.to_string(),
            real(r.wall_ms),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `n, x_0.., y_0..` for every step: `x_n` and the trial point `y_n`.
pub fn write_history(path: &Path, h: &History<f64>) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let err = csv_err(path);
    let dim = h.xs.first().map_or(0, Vec::len);
    let mut header = vec!["n".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend((0..dim).map(|i| format!("y{i}")));
    w.write_record(&header).map_err(&err)?;
    for (n, (x, y)) in h.xs.iter().zip(&h.ys).enumerate() {
        let mut rec = vec![n.to_string()];
        rec.extend(x.iter().chain(y).map(|&v| real(v)));
        w.write_record(&rec).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub struct OutDir(pub PathBuf);

impl OutDir {
    pub fn create(path: PathBuf) -> CliResult<Self> {
        ensure_dir(&path)?;
        Ok(Self(path))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}
