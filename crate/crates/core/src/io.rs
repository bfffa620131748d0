//! Input file formats.
//!
//! * prior JSON: `{"mean": [...], "sigma0": [[...], ...]}`
//! * prior CSV: row-major `Σ₀`, optional header row, zero mean
//! * spectrum JSON: `{"dimension": K, "support": [{"m": [...], "p": ...}, ...]}`
//! * flux CSV: columns `t,flux`, optional header row
//!
//! Syntax problems are reported with 1-based line and column; well-formed
//! files whose content breaks a model invariant surface as [`Error`].

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::Error;
use crate::prior::GaussianPrior;
use crate::resource::{ProbeSpectrum, SpectrumAtom};
use crate::waveform::FluxProfile;

#[derive(Debug)]
pub enum LoadError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    Invalid {
        source_name: String,
        error: Error,
    },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            LoadError::Parse {
                source_name,
                line,
                column,
                message,
            } => write!(f, "{source_name}:{line}:{column}: {message}"),
            LoadError::Invalid { source_name, error } => write!(f, "{source_name}: {error}"),
        }
    }
}

impl std::error::Error for LoadError {}

fn json_error(source_name: &str, e: serde_json::Error) -> LoadError {
    LoadError::Parse {
        source_name: source_name.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn invalid(source_name: &str, error: Error) -> LoadError {
    LoadError::Invalid {
        source_name: source_name.to_string(),
        error,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFile {
    mean: Vec<f64>,
    sigma0: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, Error> {
    let k = rows.len();
    if let Some(row) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: row.len(),
        });
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

pub fn parse_prior_json(text: &str, source_name: &str) -> Result<GaussianPrior, LoadError> {
    let raw: PriorFile = serde_json::from_str(text).map_err(|e| json_error(source_name, e))?;
    let sigma0 = matrix_from_rows(&raw.sigma0).map_err(|e| invalid(source_name, e))?;
    GaussianPrior::new(raw.mean, sigma0).map_err(|e| invalid(source_name, e))
}

/// Numeric CSV rows; a first row that does not parse as numbers is taken
/// to be a header and skipped.
fn numeric_rows(text: &str, source_name: &str) -> Result<Vec<Vec<f64>>, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| LoadError::Parse {
            source_name: source_name.to_string(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: 1,
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if rows.is_empty() && idx == 0 && parsed.iter().any(Result::is_err) {
            // header
            if parsed.iter().all(Result::is_err) {
                continue;
            }
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, value) in parsed.into_iter().enumerate() {
            match value {
                Ok(x) => row.push(x),
                Err(e) => {
                    return Err(LoadError::Parse {
                        source_name: source_name.to_string(),
                        line,
                        column: col + 1,
                        message: format!("invalid number {:?}: {e}", &record[col]),
                    })
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_prior_csv(text: &str, source_name: &str) -> Result<GaussianPrior, LoadError> {
    let rows = numeric_rows(text, source_name)?;
    let sigma0 = matrix_from_rows(&rows).map_err(|e| invalid(source_name, e))?;
    GaussianPrior::centered(sigma0).map_err(|e| invalid(source_name, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumFile {
    dimension: usize,
    support: Vec<SpectrumAtom>,
}

pub fn parse_spectrum_json(text: &str, source_name: &str) -> Result<ProbeSpectrum, LoadError> {
    let raw: SpectrumFile = serde_json::from_str(text).map_err(|e| json_error(source_name, e))?;
    ProbeSpectrum::from_atoms(raw.dimension, raw.support).map_err(|e| invalid(source_name, e))
}

pub fn parse_flux_csv(text: &str, source_name: &str) -> Result<FluxProfile, LoadError> {
    let rows = numeric_rows(text, source_name)?;
    let mut grid = Vec::with_capacity(rows.len());
    let mut flux = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != 2 {
            return Err(invalid(
                source_name,
                Error::DimensionMismatch {
                    expected: 2,
                    got: row.len(),
                },
            ));
        }
        grid.push(row[0]);
        flux.push(row[1]);
    }
    FluxProfile::new(grid, flux).map_err(|e| invalid(source_name, e))
}

pub fn read_text(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a prior, choosing JSON or CSV by file extension.
pub fn load_prior(path: &Path) -> Result<GaussianPrior, LoadError> {
    let text = read_text(path)?;
    let name = path.display().to_string();
    if is_json(path) {
        parse_prior_json(&text, &name)
    } else {
        parse_prior_csv(&text, &name)
    }
}

pub fn load_spectrum(path: &Path) -> Result<ProbeSpectrum, LoadError> {
    parse_spectrum_json(&read_text(path)?, &path.display().to_string())
}

pub fn load_flux(path: &Path) -> Result<FluxProfile, LoadError> {
    parse_flux_csv(&read_text(path)?, &path.display().to_string())
}
