//! File writers. Every file starts with the artifact version and the resolved
//! configuration so that equal configurations produce identical bytes.

use super::RunConfig;
use crate::attractor::PsiField;
use crate::Result;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Prefix of the metadata lines preceding a CSV header.
pub const CSV_COMMENT: u8 = b'#';

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn config_line(cfg: &RunConfig) -> Result<String> {
    Ok(serde_json::to_string(cfg)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `# nahopf <version>`, `# config <json>`, the header row, then one row per record.
pub fn write_csv<I>(path: &Path, cfg: &RunConfig, header: &[&str], rows: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = create(path)?;
    writeln!(w, "# nahopf {VERSION}")?;
    writeln!(w, "# config {}", config_line(cfg)?)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    artifact: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    data: &'a T,
}

/// `{"artifact", "version", "config", "data"}`, pretty-printed.
pub fn write_json<T: Serialize>(path: &Path, cfg: &RunConfig, data: &T) -> Result<PathBuf> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &Envelope { artifact: "nahopf", version: VERSION, config: cfg, data })?;
    writeln!(w)?;
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Binary P6 heatmap: one pixel per node, θ-rows top to bottom, α left to
/// right, grey level round(255·min(ψ⁺/r_top, 1)).
pub fn ppm_bytes(field: &PsiField, r_top: f64, cfg: &RunConfig) -> Result<Vec<u8>> {
    let (h, w) = (field.grid.theta_res, field.grid.alpha_res);
    let mut out = format!("P6\n# nahopf {VERSION} config {}\n{w} {h}\n255\n", config_line(cfg)?).into_bytes();
    out.reserve(3 * w * h);
    for &v in &field.values {
        let g = (255.0 * (v / r_top).clamp(0.0, 1.0)).round() as u8;
        out.extend_from_slice(&[g, g, g]);
    }
    Ok(out)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::write(path, bytes)?;
    Ok(path.to_path_buf())
}

/// Shortest round-trip representation; exponent form outside [1e-4, 1e16).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
