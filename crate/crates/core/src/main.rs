use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dm_ais::channel::StopRule;
use dm_ais::config::{self, ErrorList, DEFAULT_CONFIG};
use dm_ais::experiment::{run_experiment, Scheme};
use dm_ais::{nsp_solution, run_ais, secure_ee};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "dm-ais", version, about = "Secrecy-rate optimization for directional-modulation arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write trace.csv / sweep.csv (and oracle.csv).
    Run {
        /// Experiment file; the built-in reference sweep when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory, overriding the file's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        #[arg(long, value_enum)]
        stop_rule: Option<StopRule>,
        /// Add brute-force cross-checks of every solution (slow).
        #[arg(long)]
        oracle: bool,
        /// Exit with status 3 if any cell fails to converge.
        #[arg(long)]
        strict: bool,
    },
    /// Check a configuration file and report every problem found.
    Validate { file: PathBuf },
    /// Solve a single scenario and print the result.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "ais")]
        scheme: Scheme,
    },
    /// Print the reference experiment file.
    DefaultConfig,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { spec, out, scheme, stop_rule, oracle, strict } => {
            run(spec.as_deref(), out, scheme, stop_rule, oracle, strict)
        }
        Command::Validate { file } => validate(&file),
        Command::Solve { file, scheme } => solve(&file, scheme),
        Command::DefaultConfig => {
            print!("{DEFAULT_CONFIG}");
            ExitCode::SUCCESS
        }
    }
}

fn report_config_errors(errors: &[config::ConfigError]) -> ExitCode {
    eprintln!("configuration error:\n{}", ErrorList(errors));
    ExitCode::from(EXIT_CONFIG)
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(
    spec_path: Option<&Path>,
    out: Option<PathBuf>,
    scheme: Option<Scheme>,
    stop_rule: Option<StopRule>,
    oracle: bool,
    strict: bool,
) -> ExitCode {
    let loaded = match spec_path {
        Some(p) => config::load_experiment(p),
        None => config::parse_experiment(DEFAULT_CONFIG),
    };
    let mut spec = match loaded {
        Ok(v) => {
            print_warnings(&v.warnings);
            v.value
        }
        Err(errors) => return report_config_errors(&errors),
    };
    if let Some(s) = scheme {
        if s.runs_nsp() && spec.n_list.contains(&1) {
            return report_config_errors(&[config::ConfigError::Invalid {
                field: "sweep.n_list".to_string(),
                message: "NSP undefined: empty null space (N = 1)".to_string(),
            }]);
        }
        spec.scheme = s;
    }
    if let Some(rule) = stop_rule {
        spec.base.tolerances.stop_rule = rule;
    }
    if let Some(dir) = out {
        spec.output_dir = dir;
    }
    spec.oracle = oracle;

    let (result, files) = match run_experiment(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for f in &files {
        println!("wrote {}", f.display());
    }
    for row in result.oracle_failures() {
        eprintln!(
            "oracle: {} N={} SNR={} {}: solver {} < brute force {}",
            row.scheme.as_str(),
            row.n,
            row.snr_db,
            row.check,
            row.value,
            row.oracle
        );
    }
    let unconverged: Vec<_> = result.unconverged().collect();
    for row in &unconverged {
        eprintln!(
            "not converged: {} N={} SNR={} dB after {} iterations",
            row.scheme.as_str(),
            row.n,
            row.snr_db,
            row.iterations
        );
    }
    if strict && !unconverged.is_empty() {
        return ExitCode::from(EXIT_UNCONVERGED);
    }
    ExitCode::SUCCESS
}

fn validate(file: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            return report_config_errors(&[config::ConfigError::Io {
                path: file.to_path_buf(),
                message: e.to_string(),
            }])
        }
    };
    if config::has_sweep(&text) {
        match config::parse_experiment(&text) {
            Ok(v) => {
                print_warnings(&v.warnings);
                let s = v.value;
                println!(
                    "ok: scheme {:?}, N {:?}, SNR {:?} dB, {} cells",
                    s.scheme,
                    s.n_list,
                    s.snr_list,
                    s.n_list.len() * s.snr_list.len()
                );
                ExitCode::SUCCESS
            }
            Err(errors) => report_config_errors(&errors),
        }
    } else {
        match config::parse_system(&text) {
            Ok(v) => {
                print_warnings(&v.warnings);
                let c = v.value;
                println!(
                    "ok: N = {}, theta_b = {} deg, theta_e = {} deg, d/lambda = {}, P_s = {} dBm, SNR = {} dB",
                    c.n_antennas, c.theta_b_deg, c.theta_e_deg, c.spacing_over_lambda, c.total_power_dbm, c.snr_db
                );
                ExitCode::SUCCESS
            }
            Err(errors) => report_config_errors(&errors),
        }
    }
}

fn solve(file: &Path, scheme: Scheme) -> ExitCode {
    let cfg = match config::validate_config(file) {
        Ok(v) => {
            print_warnings(&v.warnings);
            v.value
        }
        Err(errors) => return report_config_errors(&errors),
    };
    if scheme.runs_ais() {
        match run_ais(&cfg) {
            Ok(out) => println!(
                "ais: secrecy_rate_bits = {}, beta = {}, iterations = {}, converged = {}, secure_ee = {} bit/s/Hz/W",
                out.state.secrecy_rate_bits,
                out.state.beta,
                out.trace.iterations_used,
                out.trace.converged,
                secure_ee(out.state.secrecy_rate_bits, &cfg)
            ),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    if scheme.runs_nsp() {
        match nsp_solution(&cfg) {
            Ok(out) => println!(
                "nsp: secrecy_rate_bits = {}, beta = {}, secure_ee = {} bit/s/Hz/W",
                out.state.secrecy_rate_bits,
                out.state.beta,
                secure_ee(out.state.secrecy_rate_bits, &cfg)
            ),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
    }
    ExitCode::SUCCESS
}
