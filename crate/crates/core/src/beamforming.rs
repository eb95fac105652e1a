//! Confidential-message beamformer for a fixed AN vector and power split.
//!
//! With `A = (1-beta)|h_b^H v_an|^2 + rho` and `B = (1-beta)|h_e^H v_an|^2 + rho`
//! the secrecy rate in `v_b` is the log of the generalized Rayleigh quotient
//!
//! ```text
//! v^H (AB I + beta B h_b h_b^H) v / v^H (AB I + beta A h_e h_e^H) v
//! ```
//!
//! whose maximizer is the dominant eigenvector of the pencil.

use crate::channel::{ChannelPair, SystemConfig};
use crate::numerics::{dominant_eigenvector, ComplexVec, LowRankHermitian, PowerIteration};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamScalars {
    pub a: f64,
    pub b: f64,
}

pub fn beam_scalars(cp: &ChannelPair, v_an: &ComplexVec, beta: f64, cfg: &SystemConfig) -> BeamScalars {
    let rho = cfg.noise_to_power();
    BeamScalars {
        a: (1.0 - beta) * cp.h_b.projection_power(v_an) + rho,
        b: (1.0 - beta) * cp.h_e.projection_power(v_an) + rho,
    }
}

#[derive(Debug, Clone)]
pub struct BeamOutcome {
    /// Unit norm, first entry real and non-negative.
    pub v_b: ComplexVec,
    /// Largest value of the generalized Rayleigh quotient.
    pub gain: f64,
    /// `beta == 0`: every unit vector is optimal and `h_b` was returned.
    pub flat_objective: bool,
    pub converged: bool,
}

/// Numerator and denominator matrices of the beamforming quotient.
pub fn beam_pencil(
    cp: &ChannelPair,
    v_an: &ComplexVec,
    beta: f64,
    cfg: &SystemConfig,
) -> (LowRankHermitian, LowRankHermitian) {
    let BeamScalars { a, b } = beam_scalars(cp, v_an, beta, cfg);
    let n = cp.dim();
    let num = LowRankHermitian::scaled_identity(n, a * b).with_term(beta * b, &cp.h_b);
    let den = LowRankHermitian::scaled_identity(n, a * b).with_term(beta * a, &cp.h_e);
    (num, den)
}

pub fn optimize_vb(cp: &ChannelPair, v_an: &ComplexVec, beta: f64, cfg: &SystemConfig) -> BeamOutcome {
    if beta <= 0.0 {
        return BeamOutcome { v_b: cp.h_b.phase_normalized(), gain: 1.0, flat_objective: true, converged: true };
    }
    let (num, den) = beam_pencil(cp, v_an, beta, cfg);
    let opts = PowerIteration {
        tol: cfg.tolerances.power_iteration_tol,
        max_iter: cfg.tolerances.power_iteration_max_iter,
        start: Some(cp.h_b.clone()),
    };
    let apply = |v: &ComplexVec| den.solve(&num.apply(v)).expect("denominator is positive definite");
    let (pair, converged) = match dominant_eigenvector(apply, cp.dim(), &opts) {
        Ok(p) => (p, true),
        Err(e) => (e.best, false),
    };
    let gain = num.quadratic_form(&pair.vector) / den.quadratic_form(&pair.vector);
    BeamOutcome { v_b: pair.vector, gain, flat_objective: false, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::an_design::max_anlnr_init;
    use crate::channel::build_channels;
    use crate::secrecy::unclamped_rate;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> ComplexVec {
        ComplexVec::from_fn(n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .normalized()
            .unwrap()
    }

    #[test]
    fn full_cm_power_leaves_only_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = SystemConfig::reference(8, 15.0);
        let cp = build_channels(&cfg);
        let s = beam_scalars(&cp, &random_unit(&mut rng, 8), 1.0, &cfg);
        assert_eq!(s.a, cfg.noise_to_power());
        assert_eq!(s.b, cfg.noise_to_power());
    }

    #[test]
    fn orthogonal_noise_leaves_only_noise() {
        // cos 60 - cos 90 = 1/2 makes the N = 4 steering vectors orthogonal.
        let cfg = SystemConfig { theta_b_deg: 60.0, theta_e_deg: 90.0, ..SystemConfig::reference(4, 10.0) };
        let cp = build_channels(&cfg);
        assert!(cp.h_b.dot(&cp.h_e).norm() < 1e-15);
        let mut v = ComplexVec::basis(4, 0);
        for h in [&cp.h_b, &cp.h_e] {
            v = v.axpy(-h.dot(&v), h);
        }
        let v = v.normalized().unwrap();
        for beta in [0.0, 0.3, 0.9] {
            let s = beam_scalars(&cp, &v, beta, &cfg);
            assert!((s.a - cfg.noise_to_power()).abs() < 1e-15);
            assert!((s.b - cfg.noise_to_power()).abs() < 1e-15);
        }
    }

    #[test]
    fn scalars_match_direct_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = SystemConfig::reference(8, 12.0);
        let cp = build_channels(&cfg);
        let v_an = random_unit(&mut rng, 8);
        let s = beam_scalars(&cp, &v_an, 0.3, &cfg);
        let mut dot_b = Complex64::new(0.0, 0.0);
        let mut dot_e = Complex64::new(0.0, 0.0);
        for i in 0..8 {
            dot_b += cp.h_b[i].conj() * v_an[i];
            dot_e += cp.h_e[i].conj() * v_an[i];
        }
        let rho = cfg.noise_power_w() / cfg.total_power_w();
        assert!((s.a - (0.7 * dot_b.norm_sqr() + rho)).abs() < 1e-12);
        assert!((s.b - (0.7 * dot_e.norm_sqr() + rho)).abs() < 1e-12);
    }

    #[test]
    fn matched_filter_when_eve_orthogonal() {
        let cfg = SystemConfig { theta_b_deg: 60.0, theta_e_deg: 90.0, ..SystemConfig::reference(4, 10.0) };
        let cp = build_channels(&cfg);
        let v_an = cp.h_e.clone();
        let out = optimize_vb(&cp, &v_an, 1.0, &cfg);
        assert!(out.converged);
        assert!(out.v_b.distance_up_to_phase(&cp.h_b) < 1e-8);
    }

    #[test]
    fn single_antenna() {
        let cfg = SystemConfig::reference(1, 10.0);
        let cp = build_channels(&cfg);
        let out = optimize_vb(&cp, &cp.h_b, 0.5, &cfg);
        assert!((out.v_b[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_beta_is_flat() {
        let cfg = SystemConfig::reference(8, 10.0);
        let cp = build_channels(&cfg);
        let out = optimize_vb(&cp, &cp.h_e, 0.0, &cfg);
        assert!(out.flat_objective);
        assert_eq!(out.v_b, cp.h_b.phase_normalized());
    }

    #[test]
    fn beats_random_beams_from_anlnr_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = SystemConfig::reference(4, 15.0);
        let cp = build_channels(&cfg);
        let rho = cfg.noise_to_power();
        let v_an = max_anlnr_init(&cp, 0.5, &cfg);
        let out = optimize_vb(&cp, &v_an, 0.5, &cfg);
        let best = unclamped_rate(&cp, &out.v_b, &v_an, 0.5, rho);
        assert!(best >= unclamped_rate(&cp, &cp.h_b, &v_an, 0.5, rho) - 1e-6);
        for _ in 0..100_000 {
            let u = random_unit(&mut rng, 4);
            assert!(best >= unclamped_rate(&cp, &u, &v_an, 0.5, rho) - 1e-6);
        }
    }

    #[test]
    fn beam_lies_in_channel_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.gen_range(3..32);
            let cfg = SystemConfig {
                theta_b_deg: rng.gen_range(10.0..170.0),
                theta_e_deg: rng.gen_range(10.0..170.0),
                ..SystemConfig::reference(n, rng.gen_range(0.0..25.0))
            };
            let cp = build_channels(&cfg);
            let out = optimize_vb(&cp, &random_unit(&mut rng, n), rng.gen_range(0.05..1.0), &cfg);
            // Orthonormal basis of span{h_b, h_e}.
            let q1 = cp.h_b.clone();
            let r = cp.h_e.axpy(-q1.dot(&cp.h_e), &q1);
            let mut residual = out.v_b.axpy(-q1.dot(&out.v_b), &q1);
            if r.norm() > 1e-9 {
                let q2 = r.normalized().unwrap();
                residual = residual.axpy(-q2.dot(&residual), &q2);
            }
            assert!(residual.norm() < 1e-6, "residual {}", residual.norm());
        }
    }

    #[test]
    fn invariant_under_joint_power_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = SystemConfig::reference(12, 15.0);
        let mut other = cfg.clone();
        other.total_power_dbm = 20.0;
        let cp = build_channels(&cfg);
        let v_an = random_unit(&mut rng, 12);
        let a = optimize_vb(&cp, &v_an, 0.4, &cfg);
        let b = optimize_vb(&cp, &v_an, 0.4, &other);
        assert!(a.v_b.max_abs_diff(&b.v_b) < 1e-12);
    }
}
