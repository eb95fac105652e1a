//! Null-space projection baseline: matched-filter beam toward the legitimate
//! receiver, AN confined to the orthogonal complement of its channel, and
//! the closed-form power split applied to those fixed vectors.

use thiserror::Error;

use crate::channel::{build_channels, ChannelPair, SystemConfig};
use crate::numerics::ComplexVec;
use crate::power_allocation::{optimize_beta, pa_coefficients, PaSolution};
use crate::secrecy::SolutionState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NspError {
    #[error("NSP undefined: empty null space (N = 1)")]
    EmptyNullSpace,
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct NspOutcome {
    pub state: SolutionState,
    pub power_allocation: PaSolution,
    /// The eavesdropper channel was parallel to the legitimate one, so the AN
    /// vector is an arbitrary unit vector orthogonal to `h_b`.
    pub degenerate: bool,
    pub channels: ChannelPair,
}

/// Removes the `q` component from `v` twice (classical Gram-Schmidt with
/// re-orthogonalization). `q` must be unit norm.
fn project_out(v: &ComplexVec, q: &ComplexVec) -> ComplexVec {
    let once = v.axpy(-q.dot(v), q);
    once.axpy(-q.dot(&once), q)
}

/// Unit vector in the null space of `h_b^H`, aimed at the eavesdropper.
pub fn nsp_an_vector(cp: &ChannelPair) -> Result<(ComplexVec, bool), NspError> {
    let n = cp.dim();
    if n < 2 {
        return Err(NspError::EmptyNullSpace);
    }
    let q = cp.h_b.normalized().expect("unit channel");
    let projected = project_out(&cp.h_e, &q);
    if projected.norm() > 1e-10 {
        let v = project_out(&projected.normalized().expect("non-zero"), &q);
        return Ok((v.normalized().expect("non-zero").phase_normalized(), false));
    }
    let fallback = (0..n)
        .map(|k| project_out(&ComplexVec::basis(n, k), &q))
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("n >= 2");
    let v = project_out(&fallback.normalized().expect("non-zero"), &q);
    Ok((v.normalized().expect("non-zero").phase_normalized(), true))
}

pub fn nsp_solution(cfg: &SystemConfig) -> Result<NspOutcome, NspError> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(NspError::InvalidConfig(violations));
    }
    let cp = build_channels(cfg);
    let (v_an, degenerate) = nsp_an_vector(&cp)?;
    let v_b = cp.h_b.phase_normalized();
    let pa = optimize_beta(&pa_coefficients(&cp, &v_b, &v_an, cfg));
    let state = SolutionState::evaluate(&cp, cfg, v_b, v_an, pa.beta);
    Ok(NspOutcome { state, power_allocation: pa, degenerate, channels: cp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ais::run_ais;
    use crate::secrecy::rate_bob;

    #[test]
    fn annihilates_bob_channel() {
        for n in [2, 3, 8, 16, 64, 128] {
            for (tb, te) in [(45.0, 30.0), (45.0, 44.999), (60.0, 90.0), (120.0, 20.0)] {
                let cfg = SystemConfig { theta_b_deg: tb, theta_e_deg: te, ..SystemConfig::reference(n, 15.0) };
                let out = nsp_solution(&cfg).unwrap();
                assert!(out.channels.h_b.dot(&out.state.v_an).norm() <= 1e-12, "n={n} {tb}/{te}");
                assert!(out.state.v_an.is_unit());
            }
        }
    }

    #[test]
    fn orthogonal_eve_keeps_her_channel() {
        let cfg = SystemConfig { theta_b_deg: 60.0, theta_e_deg: 90.0, ..SystemConfig::reference(4, 10.0) };
        let out = nsp_solution(&cfg).unwrap();
        assert!(out.state.v_an.distance_up_to_phase(&out.channels.h_e) < 1e-12);
        assert!(!out.degenerate);
    }

    #[test]
    fn single_antenna_has_no_null_space() {
        assert_eq!(nsp_solution(&SystemConfig::reference(1, 10.0)).unwrap_err(), NspError::EmptyNullSpace);
    }

    #[test]
    fn parallel_channels_fall_back() {
        let mut cfg = SystemConfig::reference(8, 10.0);
        cfg.theta_e_deg = cfg.theta_b_deg;
        let out = nsp_solution(&cfg).unwrap();
        assert!(out.degenerate);
        assert!(out.channels.h_b.dot(&out.state.v_an).norm() <= 1e-12);
        assert_eq!(out.state.secrecy_rate_bits, 0.0);
    }

    #[test]
    fn bob_hears_no_noise() {
        for snr in [0.0, 15.0, 25.0] {
            let cfg = SystemConfig::reference(16, snr);
            let out = nsp_solution(&cfg).unwrap();
            let expected = (1.0 + out.state.beta / cfg.noise_to_power()).log2();
            assert!((rate_bob(&out.channels, &out.state, &cfg) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ais_beats_nsp_at_high_snr() {
        let cfg = SystemConfig::reference(16, 25.0);
        let ais = run_ais(&cfg).unwrap();
        let nsp = nsp_solution(&cfg).unwrap();
        assert!(ais.state.secrecy_rate_bits >= nsp.state.secrecy_rate_bits);
    }
}
