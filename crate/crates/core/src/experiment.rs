//! Parameter sweeps over antenna count and SNR, written as CSV.
//!
//! Grid cells run in parallel; results are merged in sorted order so the
//! files are byte-identical from run to run.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ais::{run_ais, AisError, INITIAL_BETA};
use crate::channel::SystemConfig;
use crate::nsp::{nsp_solution, NspError};
use crate::numerics::ComplexVec;
use crate::power_allocation::{optimize_beta, pa_coefficients};
use crate::secrecy::unclamped_rate;

pub const TRACE_FILE: &str = "trace.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const ORACLE_FILE: &str = "oracle.csv";

const BETA_GRID_POINTS: usize = 10_000;
const PROBES_PER_RADIUS: usize = 500;
const PROBE_RADII: [f64; 3] = [0.3, 0.03, 0.003];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ais,
    Nsp,
    Both,
}

impl Scheme {
    pub fn runs_ais(self) -> bool {
        matches!(self, Scheme::Ais | Scheme::Both)
    }

    pub fn runs_nsp(self) -> bool {
        matches!(self, Scheme::Nsp | Scheme::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scheme: Scheme,
    pub n_list: Vec<usize>,
    pub snr_list: Vec<f64>,
    /// Geometry, power and tolerances shared by every cell; its `n_antennas`
    /// and `snr_db` are overwritten per cell.
    pub base: SystemConfig,
    pub output_dir: PathBuf,
    /// Seeds the randomized cross-checks only.
    pub seed: u64,
    pub oracle: bool,
}

impl ExperimentSpec {
    pub fn cell_config(&self, n: usize, snr_db: f64) -> SystemConfig {
        SystemConfig { n_antennas: n, snr_db, ..self.base.clone() }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("AIS failed at N = {n}, SNR = {snr_db} dB: {source}")]
    Ais { n: usize, snr_db: f64, source: AisError },
    #[error("NSP failed at N = {n}, SNR = {snr_db} dB: {source}")]
    Nsp { n: usize, snr_db: f64, source: NspError },
    #[error("cannot write {}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowScheme {
    Ais,
    Nsp,
}

impl RowScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            RowScheme::Ais => "ais",
            RowScheme::Nsp => "nsp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: RowScheme,
    pub n: usize,
    pub snr_db: f64,
    pub secrecy_rate_bits: f64,
    pub beta_star: f64,
    /// Outer iterations; zero for the closed-form baseline.
    pub iterations: usize,
    pub converged: bool,
}

/// One point of an AIS convergence curve. Iteration 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub snr_db: f64,
    pub iteration: usize,
    pub secrecy_rate_bits: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub scheme: RowScheme,
    pub n: usize,
    pub snr_db: f64,
    pub check: &'static str,
    /// Objective reached by the solver.
    pub value: f64,
    /// Best objective found by the brute-force search.
    pub oracle: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub sweep: Vec<SweepRow>,
    pub trace: Vec<TraceRow>,
    pub oracle: Vec<OracleRow>,
}

impl ExperimentResult {
    pub fn all_converged(&self) -> bool {
        self.sweep.iter().all(|r| r.converged)
    }

    pub fn unconverged(&self) -> impl Iterator<Item = &SweepRow> {
        self.sweep.iter().filter(|r| !r.converged)
    }

    pub fn oracle_failures(&self) -> impl Iterator<Item = &OracleRow> {
        self.oracle.iter().filter(|r| !r.pass)
    }
}

#[derive(Debug, Default)]
struct CellOutput {
    sweep: Vec<SweepRow>,
    trace: Vec<TraceRow>,
    oracle: Vec<OracleRow>,
}

/// Runs every grid cell without touching the filesystem.
pub fn compute(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    let cells: Vec<(usize, usize, f64)> = spec
        .n_list
        .iter()
        .flat_map(|&n| spec.snr_list.iter().map(move |&snr| (n, snr)))
        .enumerate()
        .map(|(idx, (n, snr))| (idx, n, snr))
        .collect();

    let outputs: Vec<CellOutput> =
        cells.par_iter().map(|&(idx, n, snr)| run_cell(spec, idx, n, snr)).collect::<Result<_, _>>()?;

    let mut result = ExperimentResult::default();
    for out in outputs {
        result.sweep.extend(out.sweep);
        result.trace.extend(out.trace);
        result.oracle.extend(out.oracle);
    }
    result.sweep.sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.n.cmp(&b.n)).then(a.snr_db.total_cmp(&b.snr_db)));
    result.trace.sort_by(|a, b| a.n.cmp(&b.n).then(a.snr_db.total_cmp(&b.snr_db)).then(a.iteration.cmp(&b.iteration)));
    result.oracle.sort_by(|a, b| {
        a.scheme.cmp(&b.scheme).then(a.n.cmp(&b.n)).then(a.snr_db.total_cmp(&b.snr_db)).then(a.check.cmp(b.check))
    });
    Ok(result)
}

fn run_cell(spec: &ExperimentSpec, idx: usize, n: usize, snr_db: f64) -> Result<CellOutput, ExperimentError> {
    let cfg = spec.cell_config(n, snr_db);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(idx as u64);
    let mut out = CellOutput::default();

    if spec.scheme.runs_ais() {
        let ais = run_ais(&cfg).map_err(|source| ExperimentError::Ais { n, snr_db, source })?;
        out.trace.push(TraceRow { n, snr_db, iteration: 0, secrecy_rate_bits: 0.0, beta: INITIAL_BETA });
        out.trace.extend(ais.trace.records.iter().map(|r| TraceRow {
            n,
            snr_db,
            iteration: r.iteration,
            secrecy_rate_bits: r.rate_after_beta.max(0.0),
            beta: r.beta,
        }));
        out.sweep.push(SweepRow {
            scheme: RowScheme::Ais,
            n,
            snr_db,
            secrecy_rate_bits: ais.state.secrecy_rate_bits,
            beta_star: ais.state.beta,
            iterations: ais.trace.iterations_used,
            converged: ais.trace.converged,
        });
        if spec.oracle {
            let s = &ais.state;
            let slack = cfg.tolerances.ais_tol;
            out.oracle.push(beta_grid_check(RowScheme::Ais, &cfg, &ais.channels, &s.v_b, &s.v_an));
            out.oracle.push(probe_check(RowScheme::Ais, "vb_probe", &cfg, &ais.channels, s, true, slack, &mut rng));
            if s.beta < 1.0 {
                out.oracle.push(probe_check(
                    RowScheme::Ais,
                    "van_probe",
                    &cfg,
                    &ais.channels,
                    s,
                    false,
                    slack,
                    &mut rng,
                ));
            }
        }
    }

    if spec.scheme.runs_nsp() {
        let nsp = nsp_solution(&cfg).map_err(|source| ExperimentError::Nsp { n, snr_db, source })?;
        out.sweep.push(SweepRow {
            scheme: RowScheme::Nsp,
            n,
            snr_db,
            secrecy_rate_bits: nsp.state.secrecy_rate_bits,
            beta_star: nsp.state.beta,
            iterations: 0,
            converged: true,
        });
        if spec.oracle {
            out.oracle.push(beta_grid_check(RowScheme::Nsp, &cfg, &nsp.channels, &nsp.state.v_b, &nsp.state.v_an));
        }
    }
    Ok(out)
}

/// Closed-form power split against a uniform grid on `[0, 1]`.
fn beta_grid_check(
    scheme: RowScheme,
    cfg: &SystemConfig,
    cp: &crate::channel::ChannelPair,
    v_b: &ComplexVec,
    v_an: &ComplexVec,
) -> OracleRow {
    let q = pa_coefficients(cp, v_b, v_an, cfg);
    let value = optimize_beta(&q).rate;
    let oracle = (0..BETA_GRID_POINTS)
        .map(|k| q.rate(k as f64 / (BETA_GRID_POINTS - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    OracleRow {
        scheme,
        n: cfg.n_antennas,
        snr_db: cfg.snr_db,
        check: "beta_grid",
        value,
        oracle,
        pass: value >= oracle - 1e-9,
    }
}

/// Random unit-norm perturbations of one vector with the others held fixed.
#[allow(clippy::too_many_arguments)]
fn probe_check(
    scheme: RowScheme,
    check: &'static str,
    cfg: &SystemConfig,
    cp: &crate::channel::ChannelPair,
    s: &crate::secrecy::SolutionState,
    perturb_vb: bool,
    slack: f64,
    rng: &mut ChaCha8Rng,
) -> OracleRow {
    let rho = cfg.noise_to_power();
    let eval = |v: &ComplexVec| {
        if perturb_vb {
            unclamped_rate(cp, v, &s.v_an, s.beta, rho)
        } else {
            unclamped_rate(cp, &s.v_b, v, s.beta, rho)
        }
    };
    let base = if perturb_vb { &s.v_b } else { &s.v_an };
    let value = eval(base);
    let mut oracle = value;
    for radius in PROBE_RADII {
        for _ in 0..PROBES_PER_RADIUS {
            let delta =
                ComplexVec::from_fn(base.len(), |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            if let Ok(cand) = base.axpy(Complex64::new(radius, 0.0), &delta).normalized() {
                oracle = oracle.max(eval(&cand));
            }
        }
    }
    OracleRow { scheme, n: cfg.n_antennas, snr_db: cfg.snr_db, check, value, oracle, pass: value >= oracle - slack }
}

/// `printf("%.12g")`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs());
    }
    let decimals = (11 - exp) as usize;
    strip_zeros(&format!("{x:.decimals$}")).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("n,snr_db,iteration,secrecy_rate_bits,beta\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_float(r.snr_db),
            r.iteration,
            fmt_float(r.secrecy_rate_bits),
            fmt_float(r.beta)
        ));
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("scheme,n,snr_db,secrecy_rate_bits,beta_star,iterations,converged\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme.as_str(),
            r.n,
            fmt_float(r.snr_db),
            fmt_float(r.secrecy_rate_bits),
            fmt_float(r.beta_star),
            r.iterations,
            r.converged
        ));
    }
    out
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from("scheme,n,snr_db,check,value,oracle,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme.as_str(),
            r.n,
            fmt_float(r.snr_db),
            r.check,
            fmt_float(r.value),
            fmt_float(r.oracle),
            r.pass
        ));
    }
    out
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    let io_err = |source| ExperimentError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes the CSV files for `result` into `dir`, creating it if needed, and
/// returns their paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path, oracle: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    if !result.trace.is_empty() {
        files.push((dir.join(TRACE_FILE), trace_csv(&result.trace)));
    }
    files.push((dir.join(SWEEP_FILE), sweep_csv(&result.sweep)));
    if oracle {
        files.push((dir.join(ORACLE_FILE), oracle_csv(&result.oracle)));
    }
    for (path, contents) in &files {
        write_atomic(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// [`compute`] followed by [`write_outputs`] into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(ExperimentResult, Vec<PathBuf>), ExperimentError> {
    let result = compute(spec)?;
    let files = write_outputs(&result, &spec.output_dir, spec.oracle)?;
    Ok((result, files))
}
