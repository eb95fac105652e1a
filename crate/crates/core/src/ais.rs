//! Alternating iterative structure: cycle beamformer, AN vector and power
//! split until the secrecy rate stops improving.

use thiserror::Error;

use crate::an_design::{an_quadratics, gpi_optimize_van, max_anlnr_init};
use crate::beamforming::optimize_vb;
use crate::channel::{build_channels, ChannelPair, StopRule, SystemConfig};
use crate::numerics::ComplexVec;
use crate::power_allocation::{optimize_beta, pa_coefficients};
use crate::secrecy::{unclamped_rate, SolutionState};

/// Initial power split.
pub const INITIAL_BETA: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AisError {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub rate_after_vb: f64,
    pub rate_after_van: f64,
    pub rate_after_beta: f64,
    pub beta: f64,
    /// The AN step was skipped because the incoming split carried no AN power.
    pub an_step_skipped: bool,
    /// The GPI inner loop ended without meeting its tolerance.
    pub gpi_unconverged: bool,
}

/// Per-iteration rates (unclamped) of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl IterationTrace {
    /// `R_0 = 0, R_1, R_2, ...`.
    pub fn rates(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.records.iter().map(|r| r.rate_after_beta)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct AisOutcome {
    pub state: SolutionState,
    pub trace: IterationTrace,
    pub channels: ChannelPair,
}

/// Working variables between sub-steps.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub v_b: Option<ComplexVec>,
    pub v_an: ComplexVec,
    pub beta: f64,
    /// Unclamped rate of the current triple; zero before the first cycle.
    pub rate: f64,
}

impl Iterate {
    pub fn initial(cp: &ChannelPair, cfg: &SystemConfig) -> Self {
        Self { v_b: None, v_an: max_anlnr_init(cp, INITIAL_BETA, cfg), beta: INITIAL_BETA, rate: 0.0 }
    }
}

/// One pass of `v_b -> v_an -> beta`. Every sub-step keeps its previous
/// value when the new one would lower the rate.
pub fn ais_cycle(cp: &ChannelPair, cfg: &SystemConfig, it: &Iterate, iteration: usize) -> (Iterate, IterationRecord) {
    let rho = cfg.noise_to_power();
    let tol = &cfg.tolerances;

    let mut v_b = optimize_vb(cp, &it.v_an, it.beta, cfg).v_b;
    let mut rate_after_vb = unclamped_rate(cp, &v_b, &it.v_an, it.beta, rho);
    if let Some(prev) = &it.v_b {
        let prev_rate = unclamped_rate(cp, prev, &it.v_an, it.beta, rho);
        if prev_rate > rate_after_vb {
            v_b = prev.clone();
            rate_after_vb = prev_rate;
        }
    }

    let mut v_an = it.v_an.clone();
    let mut rate_after_van = rate_after_vb;
    let mut an_step_skipped = false;
    let mut gpi_unconverged = false;
    match an_quadratics(cp, &v_b, it.beta, cfg) {
        Ok(q) => {
            let out = gpi_optimize_van(&q, &it.v_an, tol.gpi_tol, tol.gpi_max_iter);
            gpi_unconverged = !out.converged();
            let rate = unclamped_rate(cp, &v_b, &out.v_an, it.beta, rho);
            if rate >= rate_after_van {
                v_an = out.v_an;
                rate_after_van = rate;
            }
        }
        Err(_) => an_step_skipped = true,
    }

    let pa = optimize_beta(&pa_coefficients(cp, &v_b, &v_an, cfg));
    let rate_after_beta = unclamped_rate(cp, &v_b, &v_an, pa.beta, rho);
    let (beta, rate) =
        if rate_after_beta >= rate_after_van { (pa.beta, rate_after_beta) } else { (it.beta, rate_after_van) };

    let record = IterationRecord {
        iteration,
        rate_after_vb,
        rate_after_van,
        rate_after_beta: rate,
        beta,
        an_step_skipped,
        gpi_unconverged,
    };
    (Iterate { v_b: Some(v_b), v_an, beta, rate }, record)
}

fn has_converged(rule: StopRule, tol: f64, prev: f64, cur: f64) -> bool {
    let gain = cur - prev;
    match rule {
        StopRule::Abs => gain < tol,
        StopRule::Frac if prev == 0.0 => gain < tol,
        StopRule::Frac => gain / prev.abs() < tol,
    }
}

/// Runs the alternating loop from the Max-ANLNR start.
pub fn run_ais(cfg: &SystemConfig) -> Result<AisOutcome, AisError> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(AisError::InvalidConfig(violations));
    }
    let cp = build_channels(cfg);
    let mut it = Iterate::initial(&cp, cfg);
    let mut trace = IterationTrace::default();
    let tol = &cfg.tolerances;

    for iteration in 1..=tol.ais_max_iter {
        let (next, record) = ais_cycle(&cp, cfg, &it, iteration);
        let done = has_converged(tol.stop_rule, tol.ais_tol, it.rate, next.rate);
        trace.records.push(record);
        trace.iterations_used = iteration;
        it = next;
        if done {
            trace.converged = true;
            break;
        }
    }

    let v_b = it.v_b.expect("at least one cycle ran");
    let state = SolutionState::evaluate(&cp, cfg, v_b, it.v_an, it.beta);
    Ok(AisOutcome { state, trace, channels: cp })
}

/// Secrecy rate per watt of transmit power.
pub fn secure_ee(rate: f64, cfg: &SystemConfig) -> f64 {
    rate / cfg.total_power_w()
}
