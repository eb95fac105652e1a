//! Achievable rates and secrecy rate of a transmit configuration.
//!
//! Rates are written in power-normalized form: dividing numerator and
//! denominator of each SINR by `P_s` leaves only `rho = sigma^2 / P_s`.

use crate::channel::{ChannelPair, SystemConfig};
use crate::numerics::ComplexVec;

/// Beamformer, AN projection vector and power split, with the secrecy rate
/// they achieve (clamped at zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub v_b: ComplexVec,
    pub v_an: ComplexVec,
    pub beta: f64,
    pub secrecy_rate_bits: f64,
}

impl SolutionState {
    /// Builds a state and evaluates its secrecy rate.
    pub fn evaluate(cp: &ChannelPair, cfg: &SystemConfig, v_b: ComplexVec, v_an: ComplexVec, beta: f64) -> Self {
        debug_assert!(v_b.is_unit() && v_an.is_unit(), "beam vectors must be unit norm");
        debug_assert!((0.0..=1.0).contains(&beta));
        let rate = unclamped_rate(cp, &v_b, &v_an, beta, cfg.noise_to_power()).max(0.0);
        Self { v_b, v_an, beta, secrecy_rate_bits: rate }
    }

    pub fn unclamped_secrecy_rate(&self, cp: &ChannelPair, cfg: &SystemConfig) -> f64 {
        unclamped_rate(cp, &self.v_b, &self.v_an, self.beta, cfg.noise_to_power())
    }
}

/// `log2(1 + beta |h^H v_b|^2 / ((1 - beta) |h^H v_an|^2 + rho))`.
pub fn link_rate(h: &ComplexVec, v_b: &ComplexVec, v_an: &ComplexVec, beta: f64, rho: f64) -> f64 {
    let signal = beta * h.projection_power(v_b);
    let interference = (1.0 - beta) * h.projection_power(v_an) + rho;
    (signal / interference).ln_1p() / std::f64::consts::LN_2
}

/// `R(theta_b) - R(theta_e)` without the clamp at zero.
pub fn unclamped_rate(cp: &ChannelPair, v_b: &ComplexVec, v_an: &ComplexVec, beta: f64, rho: f64) -> f64 {
    link_rate(&cp.h_b, v_b, v_an, beta, rho) - link_rate(&cp.h_e, v_b, v_an, beta, rho)
}

pub fn rate_bob(cp: &ChannelPair, s: &SolutionState, cfg: &SystemConfig) -> f64 {
    link_rate(&cp.h_b, &s.v_b, &s.v_an, s.beta, cfg.noise_to_power())
}

pub fn rate_eve(cp: &ChannelPair, s: &SolutionState, cfg: &SystemConfig) -> f64 {
    link_rate(&cp.h_e, &s.v_b, &s.v_an, s.beta, cfg.noise_to_power())
}

/// `max{0, R(theta_b) - R(theta_e)}`.
pub fn secrecy_rate(cp: &ChannelPair, s: &SolutionState, cfg: &SystemConfig) -> f64 {
    s.unclamped_secrecy_rate(cp, cfg).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channels, steering_vector};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> ComplexVec {
        ComplexVec::from_fn(n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .normalized()
            .unwrap()
    }

    /// Unit vector orthogonal to every vector in `basis` (Gram-Schmidt on a
    /// random start).
    fn orthogonal_to(rng: &mut ChaCha8Rng, basis: &[&ComplexVec]) -> ComplexVec {
        let n = basis[0].len();
        let mut v = random_unit(rng, n);
        for _ in 0..2 {
            let mut ortho: Vec<ComplexVec> = Vec::new();
            for b in basis {
                let mut q = (*b).clone();
                for o in &ortho {
                    q = q.axpy(-o.dot(&q), o);
                }
                let q = q.normalized().unwrap();
                v = v.axpy(-q.dot(&v), &q);
                ortho.push(q);
            }
        }
        v.normalized().unwrap()
    }

    fn state(cp: &ChannelPair, cfg: &SystemConfig, v_b: ComplexVec, v_an: ComplexVec, beta: f64) -> SolutionState {
        SolutionState::evaluate(cp, cfg, v_b, v_an, beta)
    }

    #[test]
    fn zero_beta_gives_zero_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = SystemConfig::reference(8, 15.0);
        let cp = build_channels(&cfg);
        let s = state(&cp, &cfg, random_unit(&mut rng, 8), random_unit(&mut rng, 8), 0.0);
        assert_eq!(rate_bob(&cp, &s, &cfg), 0.0);
        assert_eq!(rate_eve(&cp, &s, &cfg), 0.0);
        assert_eq!(secrecy_rate(&cp, &s, &cfg), 0.0);
    }

    #[test]
    fn scalar_channel_at_zero_db() {
        let cfg = SystemConfig::reference(1, 0.0);
        let cp = build_channels(&cfg);
        let one = ComplexVec::from_real(&[1.0]);
        let s = state(&cp, &cfg, one.clone(), one, 1.0);
        assert!((rate_bob(&cp, &s, &cfg) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matched_beam_with_orthogonal_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = SystemConfig::reference(8, 15.0);
        let cp = build_channels(&cfg);
        let v_an = orthogonal_to(&mut rng, &[&cp.h_b]);
        let s = state(&cp, &cfg, cp.h_b.clone(), v_an, 0.5);
        let expected = (1.0 + 0.5 * 10f64.powf(1.5)).log2();
        assert!((rate_bob(&cp, &s, &cfg) - expected).abs() < 1e-12);
    }

    #[test]
    fn eve_blind_when_both_vectors_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = SystemConfig::reference(6, 10.0);
        let cp = build_channels(&cfg);
        let v_b = orthogonal_to(&mut rng, &[&cp.h_e]);
        let v_an = orthogonal_to(&mut rng, &[&cp.h_e]);
        let s = state(&cp, &cfg, v_b, v_an, 0.4);
        assert!(rate_eve(&cp, &s, &cfg).abs() < 1e-12);
    }

    #[test]
    fn eve_rate_is_bob_rate_with_roles_swapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = SystemConfig::reference(5, 12.0);
        let cp = build_channels(&cfg);
        let s = state(&cp, &cfg, random_unit(&mut rng, 5), random_unit(&mut rng, 5), 0.7);
        assert_eq!(rate_eve(&cp, &s, &cfg), rate_bob(&cp.swapped(), &s, &cfg));
        assert_eq!(s.unclamped_secrecy_rate(&cp, &cfg), -s.unclamped_secrecy_rate(&cp.swapped(), &cfg));
    }

    #[test]
    fn identical_channels_have_no_secrecy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut cfg = SystemConfig::reference(8, 20.0);
        cfg.theta_e_deg = cfg.theta_b_deg;
        let cp = build_channels(&cfg);
        for _ in 0..20 {
            let s = state(&cp, &cfg, random_unit(&mut rng, 8), random_unit(&mut rng, 8), rng.gen());
            assert_eq!(s.unclamped_secrecy_rate(&cp, &cfg), 0.0);
            assert_eq!(s.secrecy_rate_bits, 0.0);
        }
    }

    #[test]
    fn matches_expanded_product_form() {
        // Product-of-ratios form written with explicit P_s and sigma^2.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let mut cfg = SystemConfig::reference(4, rng.gen_range(0.0..25.0));
            cfg.theta_b_deg = rng.gen_range(1.0..179.0);
            cfg.theta_e_deg = rng.gen_range(1.0..179.0);
            let cp = build_channels(&cfg);
            let v_b = random_unit(&mut rng, 4);
            let v_an = random_unit(&mut rng, 4);
            let beta: f64 = rng.gen();
            let ps = cfg.total_power_w();
            let s2 = cfg.noise_power_w();
            let bb = cp.h_b.dot(&v_b).norm_sqr();
            let ba = cp.h_b.dot(&v_an).norm_sqr();
            let eb = cp.h_e.dot(&v_b).norm_sqr();
            let ea = cp.h_e.dot(&v_an).norm_sqr();
            let bob_den = (1.0 - beta) * ps * ba + s2;
            let eve_den = (1.0 - beta) * ps * ea + s2;
            let product = ((bob_den + beta * ps * bb) / bob_den) * (eve_den / (eve_den + beta * ps * eb));
            let s = state(&cp, &cfg, v_b, v_an, beta);
            assert!((s.unclamped_secrecy_rate(&cp, &cfg) - product.log2()).abs() < 1e-10);
        }
    }

    #[test]
    fn normalized_power_mode_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = SystemConfig::reference(16, 15.0);
        let mut unit_power = cfg.clone();
        unit_power.total_power_dbm = 30.0;
        let cp = build_channels(&cfg);
        let s = state(&cp, &cfg, random_unit(&mut rng, 16), random_unit(&mut rng, 16), 0.35);
        assert_eq!(rate_bob(&cp, &s, &cfg), rate_bob(&cp, &s, &unit_power));
        assert_eq!(rate_eve(&cp, &s, &cfg), rate_eve(&cp, &s, &unit_power));
        assert_eq!(secrecy_rate(&cp, &s, &cfg), secrecy_rate(&cp, &s, &unit_power));
    }

    #[test]
    fn joint_power_scaling_leaves_rates_unchanged() {
        // P_s and sigma^2 scaled together: compare against explicit-power formula.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = SystemConfig::reference(8, 15.0);
        let cp = build_channels(&cfg);
        let v_b = random_unit(&mut rng, 8);
        let v_an = random_unit(&mut rng, 8);
        let beta = 0.6;
        let explicit = |ps: f64, s2: f64, h: &ComplexVec| {
            (1.0 + beta * ps * h.projection_power(&v_b) / ((1.0 - beta) * ps * h.projection_power(&v_an) + s2)).log2()
        };
        let rho = cfg.noise_to_power();
        for scale in [1e-3, 1.0, 1e4, 1e9] {
            let rb = explicit(scale, scale * rho, &cp.h_b);
            let re = explicit(scale, scale * rho, &cp.h_e);
            assert!((rb - link_rate(&cp.h_b, &v_b, &v_an, beta, rho)).abs() < 1e-10);
            assert!((re - link_rate(&cp.h_e, &v_b, &v_an, beta, rho)).abs() < 1e-10);
        }
    }

    #[test]
    fn bob_rate_grows_with_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 8;
        let hb = steering_vector(n, 45.0, 0.5);
        let he = steering_vector(n, 30.0, 0.5);
        let cp = ChannelPair { h_b: hb.clone(), h_e: he };
        let v_an = random_unit(&mut rng, n);
        let mut prev = f64::MIN;
        for snr in (-10..=40).map(f64::from) {
            let cfg = SystemConfig::reference(n, snr);
            let s = state(&cp, &cfg, hb.clone(), v_an.clone(), 0.5);
            let r = rate_bob(&cp, &s, &cfg);
            assert!(r >= prev);
            prev = r;
        }
    }
}
