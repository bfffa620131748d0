//! Command-line driver. Every artifact starts with a provenance line
//! (CSV/text) or carries provenance fields (JSON): the SHA-256 digest of the
//! run configuration plus input file bytes, and the `λ` in use. Output is a
//! pure function of the configuration and inputs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bound::{directional_bound_with_tol, geometric_grid, scan};
use crate::error::Error;
use crate::io::{self, LoadError};
use crate::oracle::{default_suite, verify};
use crate::prior::{Direction, OUProcess};
use crate::specfun::lambda_constant;
use crate::waveform::time_resolved;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum H0Choice {
    Median,
    Value(f64),
}

impl std::str::FromStr for H0Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("median") {
            return Ok(H0Choice::Median);
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(H0Choice::Value(x)),
            _ => Err(format!("expected a finite number or `median`, got {s:?}")),
        }
    }
}

/// Geometric grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl std::str::FromStr for RatioGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let grid = RatioGrid {
            start: num(start)?,
            stop: num(stop)?,
            count: count.trim().parse().map_err(|e| format!("{count:?}: {e}"))?,
        };
        if !(grid.start > 0.0 && grid.stop > 0.0) || grid.count == 0 {
            return Err(format!("ratio grid needs positive endpoints and count, got {s:?}"));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Lambda,
    Bound {
        prior: PathBuf,
        spectrum: PathBuf,
        u: Vec<f64>,
        h0: H0Choice,
    },
    Scan {
        ratios: RatioGrid,
    },
    Waveform {
        flux: PathBuf,
        sigma0_var: f64,
        t_corr: f64,
    },
    Verify {
        suite: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub rel_tol: f64,
    pub format: OutputFormat,
    /// Destination; stdout when absent. Not part of the digest.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Load(LoadError),
    Contract(Error),
    Output { path: PathBuf, source: std::io::Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Load(e) => write!(f, "{e}"),
            CliError::Contract(e) => write!(f, "{e}"),
            CliError::Output { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Output { .. } => EXIT_PARSE,
            CliError::Load(LoadError::Invalid { .. }) => EXIT_CONTRACT,
            CliError::Load(_) => EXIT_PARSE,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Load(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Contract(e)
    }
}

/// Rendered artifact and whether any verification report failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub verification_failed: bool,
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = fmt_num(x).parse().expect("round trip");
        json!(rounded)
    } else {
        Value::String(fmt_num(x))
    }
}

fn input_paths(command: &Command) -> Vec<&Path> {
    match command {
        Command::Bound {
            prior, spectrum, ..
        } => vec![prior.as_path(), spectrum.as_path()],
        Command::Waveform { flux, .. } => vec![flux.as_path()],
        _ => Vec::new(),
    }
}

/// SHA-256 over the canonical JSON of the configuration followed by the
/// bytes of every input file.
pub fn config_digest(config: &RunConfig) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(config).expect("config serializes"));
    for path in input_paths(&config.command) {
        let bytes = std::fs::read(path).map_err(|source| {
            CliError::Load(LoadError::Io {
                path: path.to_path_buf(),
                source,
            })
        })?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

struct Provenance {
    digest: String,
    lambda: f64,
}

impl Provenance {
    fn comment(&self) -> String {
        format!(
            "# config_digest={} lambda={}\n",
            self.digest,
            fmt_num(self.lambda)
        )
    }

    fn insert(&self, map: &mut Map<String, Value>) {
        map.insert("config_digest".into(), Value::String(self.digest.clone()));
        map.insert("lambda".into(), num(self.lambda));
    }
}

fn csv_table(prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = prov.comment();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json_rows(prov: &Provenance, header: &[&str], rows: &[Vec<Value>]) -> Map<String, Value> {
    let mut map = Map::new();
    prov.insert(&mut map);
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            Value::Object(
                header
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect(),
            )
        })
        .collect();
    map.insert("rows".into(), Value::Array(rows));
    map
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn check_rel_tol(rel_tol: f64) -> Result<(), CliError> {
    if rel_tol > 1e-14 && rel_tol < 1e-2 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--rel-tol must lie in (1e-14, 1e-2), got {rel_tol}"
        )))
    }
}

/// Produces the artifact for `config` without writing it anywhere.
pub fn render(config: &RunConfig) -> Result<Rendered, CliError> {
    check_rel_tol(config.rel_tol)?;
    let prov = Provenance {
        digest: config_digest(config)?,
        lambda: lambda_constant().lambda,
    };
    let mut verification_failed = false;
    let body = match &config.command {
        Command::Lambda => {
            let c = lambda_constant();
            match config.format {
                OutputFormat::Csv => format!(
                    "{}phi={} lambda={}\n",
                    prov.comment(),
                    fmt_num(c.phi),
                    fmt_num(c.lambda)
                ),
                OutputFormat::Json => {
                    let mut map = Map::new();
                    prov.insert(&mut map);
                    map.insert("phi".into(), num(c.phi));
                    to_json_text(&Value::Object(map))
                }
            }
        }
        Command::Bound {
            prior,
            spectrum,
            u,
            h0,
        } => {
            let prior = io::load_prior(prior)?;
            let spectrum = io::load_spectrum(spectrum)?;
            let u = Direction::new(u.clone())?;
            let h0 = match h0 {
                H0Choice::Median => None,
                H0Choice::Value(x) => Some(*x),
            };
            let r = directional_bound_with_tol(&prior, &spectrum, &u, h0, config.rel_tol)?;
            let header = [
                "tau0",
                "tau_f",
                "h_plus",
                "h0",
                "z",
                "prior_limit",
                "asymptotic_limit",
                "regime",
            ];
            let values = [
                r.tau0,
                r.tau_f,
                r.h_plus,
                r.h0,
                r.z,
                r.prior_limit,
                r.asymptotic_limit,
            ];
            match config.format {
                OutputFormat::Csv => {
                    let mut row: Vec<String> = values.iter().map(|&x| fmt_num(x)).collect();
                    row.push(r.regime.as_str().into());
                    csv_table(&prov, &header, &[row])
                }
                OutputFormat::Json => {
                    let mut map = Map::new();
                    prov.insert(&mut map);
                    for (k, &x) in header.iter().zip(&values) {
                        map.insert(k.to_string(), num(x));
                    }
                    map.insert("regime".into(), Value::String(r.regime.as_str().into()));
                    map.insert("v0".into(), Value::Array(r.v0.iter().map(|&x| num(x)).collect()));
                    to_json_text(&Value::Object(map))
                }
            }
        }
        Command::Scan { ratios } => {
            let grid = geometric_grid(ratios.start, ratios.stop, ratios.count)?;
            let rows = scan(&grid, config.rel_tol)?;
            let header = [
                "ratio",
                "z_over_tauf2",
                "z_over_tau02",
                "prior_limit_norm",
                "asymptotic_limit_norm",
            ];
            let table: Vec<[f64; 5]> = rows
                .iter()
                .map(|r| {
                    [
                        r.ratio,
                        r.z_over_tauf2,
                        r.z_over_tau02,
                        r.prior_limit_norm,
                        r.asymptotic_limit_norm,
                    ]
                })
                .collect();
            numeric_output(config.format, &prov, &header, &table)
        }
        Command::Waveform {
            flux,
            sigma0_var,
            t_corr,
        } => {
            let flux = io::load_flux(flux)?;
            let ou = OUProcess::new(*sigma0_var, *t_corr, flux.grid().to_vec())?;
            let rows = time_resolved(&ou, &flux)?;
            let table: Vec<[f64; 3]> = rows.iter().map(|r| [r.t, r.h_plus_upper, r.hlimit]).collect();
            numeric_output(config.format, &prov, &["t", "h_plus_upper", "hlimit"], &table)
        }
        Command::Verify { suite } => {
            if suite != "default" {
                return Err(CliError::Usage(format!("unknown suite {suite:?} (available: default)")));
            }
            let reports = verify(&default_suite(), config.rel_tol)?;
            verification_failed = reports.iter().any(|r| !r.pass);
            match config.format {
                OutputFormat::Csv => {
                    let rows: Vec<Vec<String>> = reports
                        .iter()
                        .map(|r| {
                            vec![
                                r.instance_id.clone(),
                                fmt_num(r.achieved_mse),
                                fmt_num(r.bound),
                                fmt_num(r.margin),
                                r.pass.to_string(),
                            ]
                        })
                        .collect();
                    csv_table(
                        &prov,
                        &["instance_id", "achieved_mse", "bound", "margin", "pass"],
                        &rows,
                    )
                }
                OutputFormat::Json => {
                    let items: Vec<Value> = reports
                        .iter()
                        .map(|r| {
                            let mut map = Map::new();
                            map.insert("instance_id".into(), Value::String(r.instance_id.clone()));
                            map.insert("achieved_mse".into(), num(r.achieved_mse));
                            map.insert("bound".into(), num(r.bound));
                            map.insert("margin".into(), num(r.margin));
                            map.insert("pass".into(), Value::Bool(r.pass));
                            prov.insert(&mut map);
                            Value::Object(map)
                        })
                        .collect();
                    to_json_text(&Value::Array(items))
                }
            }
        }
    };
    Ok(Rendered {
        body,
        verification_failed,
    })
}

fn numeric_output<const N: usize>(
    format: OutputFormat,
    prov: &Provenance,
    header: &[&str; N],
    table: &[[f64; N]],
) -> String {
    match format {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|r| r.iter().map(|&x| fmt_num(x)).collect())
                .collect();
            csv_table(prov, header, &rows)
        }
        OutputFormat::Json => {
            let rows: Vec<Vec<Value>> = table.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect();
            to_json_text(&Value::Object(json_rows(prov, header, &rows)))
        }
    }
}

/// Renders and writes the artifact; returns the process exit code.
pub fn run(config: &RunConfig) -> Result<i32, CliError> {
    let rendered = render(config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &rendered.body).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?,
        None => print!("{}", rendered.body),
    }
    Ok(if rendered.verification_failed {
        EXIT_VERIFY
    } else {
        EXIT_OK
    })
}
