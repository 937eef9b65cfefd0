//! Series tables and run manifests.

use std::io::Write;
use std::path::Path;

use eplab_core::diagnostics::SERIES_COLUMNS;
use eplab_core::{
    DyadicCutoffs, EMode, Excitation, Grid, InitSpec, Params, RateFit, Sample, Scheme,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Scientific notation with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series<W: Write>(writer: W, samples: &[Sample]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(SERIES_COLUMNS)?;
    for s in samples {
        w.write_record(s.row().iter().map(|&v| format_value(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_file(path: &Path, samples: &[Sample]) -> Result<(), CliError> {
    write_series(std::fs::File::create(path)?, samples)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dimension: usize,
    pub points: usize,
    pub length: f64,
    pub spacing: f64,
    pub dealias_radius: f64,
    pub q_max: i32,
}

impl GridInfo {
    pub fn new(grid: &Grid, cutoffs: &DyadicCutoffs) -> Self {
        Self {
            dimension: grid.dim(),
            points: grid.points(),
            length: grid.length(),
            spacing: grid.spacing(),
            dealias_radius: grid.dealias_radius(),
            q_max: cutoffs.q_max(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsInfo {
    #[serde(flatten)]
    pub given: Params,
    pub branch: eplab_core::Branch,
    pub psi_bar: f64,
    pub c: f64,
    pub sigma: f64,
    pub k: f64,
}

impl ParamsInfo {
    pub fn new(params: &Params, dim: usize) -> Self {
        Self {
            given: *params,
            branch: params.branch(),
            psi_bar: params.psi_bar(),
            c: params.c(),
            sigma: Params::sigma(dim),
            k: params.k(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleInfo {
    pub excitation: Excitation,
    pub mu: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Status {
    pub ok: bool,
    pub violation: Option<String>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    /// Input configuration text, verbatim.
    pub config: String,
    pub init: InitSpec,
    pub grid: GridInfo,
    pub params: ParamsInfo,
    pub scheme: Scheme,
    pub e_mode: EMode,
    pub linear: bool,
    pub dt: Option<f64>,
    pub steps_per_sample: Option<usize>,
    pub samples: usize,
    pub series_file: String,
    pub fits: Vec<RateFit>,
    pub oracle: OracleInfo,
    pub last_sample: Option<Sample>,
    pub status: Status,
    pub wall_clock_seconds: f64,
}
