//! TOML configuration files.
//!
//! ```toml
//! [system]
//! n_antennas = 64            # optional when [sweep] gives n_list
//! theta_b_deg = 45.0
//! theta_e_deg = 30.0
//! spacing_over_lambda = 0.5
//! total_power_dbm = 70.0
//! snr_db = 15.0              # optional when [sweep] gives snr_list
//!
//! [system.tolerances]        # optional, every key defaults
//! ais_tol = 1e-3
//! stop_rule = "abs"
//!
//! [sweep]                    # only for experiments
//! scheme = "both"
//! n_list = [8, 16, 32, 64, 128]
//! snr_list = [5.0, 15.0, 25.0]
//! seed = 0
//! output_dir = "results"
//! ```
//!
//! Validation reports every problem at once rather than stopping at the
//! first.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{SystemConfig, Tolerances};
use crate::experiment::{ExperimentSpec, Scheme};

/// Configuration reproducing the reference sweep.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/reference.toml");

pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("line {line}, column {column}: {message}\n    | {source_line}")]
    Parse { line: usize, column: usize, message: String, source_line: String },
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    /// Dotted path of the offending field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Missing(f) | ConfigError::Invalid { field: f, .. } => Some(f),
            _ => None,
        }
    }
}

/// A parsed value together with non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// Wrapper so a list of errors prints one per line.
pub struct ErrorList<'a>(pub &'a [ConfigError]);

impl fmt::Display for ErrorList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    system: Option<RawSystem>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n_antennas: Option<usize>,
    theta_b_deg: Option<f64>,
    theta_e_deg: Option<f64>,
    spacing_over_lambda: Option<f64>,
    total_power_dbm: Option<f64>,
    snr_db: Option<f64>,
    #[serde(default)]
    tolerances: Tolerances,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    scheme: Option<Scheme>,
    n_list: Option<Vec<usize>>,
    snr_list: Option<Vec<f64>>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

fn parse_raw(text: &str) -> Result<RawFile, Vec<ConfigError>> {
    toml::from_str(text).map_err(|e| {
        let (line, column, source_line) = match e.span() {
            Some(span) => locate(text, span.start),
            None => (0, 0, String::new()),
        };
        vec![ConfigError::Parse { line, column, message: e.message().to_string(), source_line }]
    })
}

/// 1-based line and column of a byte offset, plus that line's text.
fn locate(text: &str, offset: usize) -> (usize, usize, String) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = text[line_start..offset].chars().count() + 1;
    let source_line = text[line_start..].lines().next().unwrap_or("").to_string();
    (line, column, source_line)
}

fn read(path: &Path) -> Result<String, Vec<ConfigError>> {
    std::fs::read_to_string(path)
        .map_err(|e| vec![ConfigError::Io { path: path.to_path_buf(), message: e.to_string() }])
}

/// Builds the system block; `n_antennas` and `snr_db` are filled in by the
/// caller when absent.
fn system_from_raw(
    raw: RawSystem,
    need_n: bool,
    need_snr: bool,
    errors: &mut Vec<ConfigError>,
) -> Option<SystemConfig> {
    let reference = SystemConfig::reference(1, 0.0);
    let mut missing = false;
    let mut take = |name: &str, v: Option<f64>, needed: bool, placeholder: f64| {
        if v.is_none() && needed {
            errors.push(ConfigError::Missing(format!("system.{name}")));
            missing = true;
        }
        v.unwrap_or(placeholder)
    };
    let cfg = SystemConfig {
        n_antennas: raw.n_antennas.unwrap_or(1),
        theta_b_deg: take("theta_b_deg", raw.theta_b_deg, true, reference.theta_b_deg),
        theta_e_deg: take("theta_e_deg", raw.theta_e_deg, true, reference.theta_e_deg),
        spacing_over_lambda: take("spacing_over_lambda", raw.spacing_over_lambda, true, reference.spacing_over_lambda),
        total_power_dbm: take("total_power_dbm", raw.total_power_dbm, true, reference.total_power_dbm),
        snr_db: take("snr_db", raw.snr_db, need_snr, 0.0),
        tolerances: raw.tolerances,
    };
    if raw.n_antennas.is_none() && need_n {
        errors.push(ConfigError::Missing("system.n_antennas".to_string()));
        missing = true;
    }
    for (field, message) in cfg.field_violations() {
        let supplied = match field {
            "n_antennas" => raw.n_antennas.is_some(),
            "snr_db" => raw.snr_db.is_some(),
            _ => true,
        };
        if supplied {
            errors.push(ConfigError::Invalid { field: format!("system.{field}"), message });
        }
    }
    (!missing).then_some(cfg)
}

fn geometry_warnings(cfg: &SystemConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.is_zero_secrecy_geometry() {
        out.push(format!(
            "zero-secrecy geometry: theta_b_deg = {} and theta_e_deg = {} give identical channels",
            cfg.theta_b_deg, cfg.theta_e_deg
        ));
    }
    out
}

/// Parses a single-scenario configuration. Every field of `[system]` except
/// `tolerances` is required; a `[sweep]` table is ignored.
pub fn parse_system(text: &str) -> Result<Validated<SystemConfig>, Vec<ConfigError>> {
    let raw = parse_raw(text)?;
    let Some(system) = raw.system else {
        return Err(vec![ConfigError::Missing("system".to_string())]);
    };
    let mut errors = Vec::new();
    let cfg = system_from_raw(system, true, true, &mut errors);
    match cfg {
        Some(cfg) if errors.is_empty() => Ok(Validated { warnings: geometry_warnings(&cfg), value: cfg }),
        _ => Err(errors),
    }
}

/// Reads and validates a single-scenario configuration file.
pub fn validate_config(path: &Path) -> Result<Validated<SystemConfig>, Vec<ConfigError>> {
    parse_system(&read(path)?)
}

/// Parses an experiment description: `[system]` for the shared settings and
/// `[sweep]` for the grid.
pub fn parse_experiment(text: &str) -> Result<Validated<ExperimentSpec>, Vec<ConfigError>> {
    let raw = parse_raw(text)?;
    let Some(system) = raw.system else {
        return Err(vec![ConfigError::Missing("system".to_string())]);
    };
    let sweep = raw.sweep.unwrap_or_default();
    let mut errors = Vec::new();

    let n_single = system.n_antennas;
    let snr_single = system.snr_db;
    let base = system_from_raw(system, sweep.n_list.is_none(), sweep.snr_list.is_none(), &mut errors);

    let mut axis = |name: &str, list: Option<Vec<f64>>, single: Option<f64>| -> Vec<f64> {
        match (list, single) {
            (Some(_), Some(_)) => {
                errors.push(ConfigError::Invalid {
                    field: format!("sweep.{name}"),
                    message: "conflicts with the single value in [system]; give one or the other".to_string(),
                });
                Vec::new()
            }
            (Some(list), None) => {
                if list.is_empty() {
                    errors.push(ConfigError::Invalid {
                        field: format!("sweep.{name}"),
                        message: "must not be empty".to_string(),
                    });
                }
                let mut sorted = list.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    errors.push(ConfigError::Invalid {
                        field: format!("sweep.{name}"),
                        message: "contains duplicate values".to_string(),
                    });
                }
                list
            }
            (None, Some(v)) => vec![v],
            (None, None) => Vec::new(),
        }
    };
    let n_list: Vec<usize> =
        axis("n_list", sweep.n_list.map(|l| l.into_iter().map(|n| n as f64).collect()), n_single.map(|n| n as f64))
            .into_iter()
            .map(|n| n as usize)
            .collect();
    let snr_list = axis("snr_list", sweep.snr_list, snr_single);

    let scheme = sweep.scheme.unwrap_or(Scheme::Both);
    if let Some(&bad) = n_list.iter().find(|&&n| n == 0) {
        errors.push(ConfigError::Invalid { field: "sweep.n_list".to_string(), message: format!("{bad} antennas") });
    } else if scheme.runs_nsp() && n_list.contains(&1) {
        errors.push(ConfigError::Invalid {
            field: "sweep.n_list".to_string(),
            message: "NSP undefined: empty null space (N = 1)".to_string(),
        });
    }
    if let Some(bad) = snr_list.iter().find(|v| !v.is_finite()) {
        errors.push(ConfigError::Invalid {
            field: "sweep.snr_list".to_string(),
            message: format!("{bad} is not finite"),
        });
    }

    match base {
        Some(base) if errors.is_empty() => Ok(Validated {
            warnings: geometry_warnings(&base),
            value: ExperimentSpec {
                scheme,
                n_list,
                snr_list,
                base,
                output_dir: sweep.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
                seed: sweep.seed.unwrap_or(0),
                oracle: false,
            },
        }),
        _ => Err(errors),
    }
}

/// Reads and validates an experiment file.
pub fn load_experiment(path: &Path) -> Result<Validated<ExperimentSpec>, Vec<ConfigError>> {
    parse_experiment(&read(path)?)
}

/// Whether the text carries a `[sweep]` table.
pub fn has_sweep(text: &str) -> bool {
    matches!(toml::from_str::<toml::Table>(text), Ok(t) if t.contains_key("sweep"))
}
