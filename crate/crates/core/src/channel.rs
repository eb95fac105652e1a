//! Line-of-sight uniform linear array channel and link budget.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::ComplexVec;

/// How the outer alternating loop decides it has converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// `R_i - R_{i-1} < tol`.
    #[default]
    Abs,
    /// `(R_i - R_{i-1}) / |R_{i-1}| < tol`; falls back to the absolute test
    /// while the previous rate is zero.
    Frac,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub power_iteration_tol: f64,
    pub power_iteration_max_iter: usize,
    pub gpi_tol: f64,
    pub gpi_max_iter: usize,
    pub ais_tol: f64,
    pub ais_max_iter: usize,
    pub stop_rule: StopRule,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            power_iteration_tol: 1e-10,
            power_iteration_max_iter: 10_000,
            gpi_tol: 1e-8,
            gpi_max_iter: 500,
            ais_tol: 1e-3,
            ais_max_iter: 50,
            stop_rule: StopRule::Abs,
        }
    }
}

/// Array geometry, directions and link budget of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_antennas: usize,
    /// Direction of the legitimate receiver, degrees from the array axis.
    pub theta_b_deg: f64,
    /// Direction of the eavesdropper, degrees from the array axis.
    pub theta_e_deg: f64,
    pub spacing_over_lambda: f64,
    pub total_power_dbm: f64,
    /// Transmit SNR `P_s / sigma^2` in dB.
    pub snr_db: f64,
    pub tolerances: Tolerances,
}

impl SystemConfig {
    /// 45 deg / 30 deg geometry, half-wavelength spacing, 70 dBm.
    pub fn reference(n_antennas: usize, snr_db: f64) -> Self {
        Self {
            n_antennas,
            theta_b_deg: 45.0,
            theta_e_deg: 30.0,
            spacing_over_lambda: 0.5,
            total_power_dbm: 70.0,
            snr_db,
            tolerances: Tolerances::default(),
        }
    }

    pub fn total_power_w(&self) -> f64 {
        dbm_to_watts(self.total_power_dbm)
    }

    /// `sigma^2 = P_s / 10^(snr/10)` in watts.
    pub fn noise_power_w(&self) -> f64 {
        self.total_power_w() / 10f64.powf(self.snr_db / 10.0)
    }

    /// `sigma^2 / P_s`. Every rate expression depends on the powers only
    /// through this ratio, so it is computed straight from the SNR.
    pub fn noise_to_power(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    /// Problems with this configuration as `field: message`; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        self.field_violations().into_iter().map(|(f, m)| format!("{f}: {m}")).collect()
    }

    /// Problems with this configuration, keyed by field path.
    pub fn field_violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.n_antennas < 1 {
            out.push(("n_antennas", "must be at least 1".to_string()));
        }
        for (name, theta) in [("theta_b_deg", self.theta_b_deg), ("theta_e_deg", self.theta_e_deg)] {
            if !(theta > 0.0 && theta < 180.0) {
                out.push((name, format!("{theta} is outside (0, 180)")));
            }
        }
        if !(self.spacing_over_lambda > 0.0 && self.spacing_over_lambda.is_finite()) {
            out.push(("spacing_over_lambda", format!("{} must be positive", self.spacing_over_lambda)));
        }
        if !self.total_power_dbm.is_finite() {
            out.push(("total_power_dbm", "must be finite".to_string()));
        }
        if !self.snr_db.is_finite() {
            out.push(("snr_db", "must be finite".to_string()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.power_iteration_tol", t.power_iteration_tol),
            ("tolerances.gpi_tol", t.gpi_tol),
            ("tolerances.ais_tol", t.ais_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                out.push((name, format!("{v} must be positive")));
            }
        }
        for (name, v) in [
            ("tolerances.power_iteration_max_iter", t.power_iteration_max_iter),
            ("tolerances.gpi_max_iter", t.gpi_max_iter),
            ("tolerances.ais_max_iter", t.ais_max_iter),
        ] {
            if v == 0 {
                out.push((name, "must be at least 1".to_string()));
            }
        }
        out
    }

    /// Whether both directions share the same steering vector.
    pub fn is_zero_secrecy_geometry(&self) -> bool {
        self.theta_b_deg.to_radians().cos() == self.theta_e_deg.to_radians().cos()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Channels from the transmitter to the legitimate receiver and to the
/// eavesdropper, both unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub h_b: ComplexVec,
    pub h_e: ComplexVec,
}

impl ChannelPair {
    pub fn dim(&self) -> usize {
        self.h_b.len()
    }

    /// Same pair with the receiver roles exchanged.
    pub fn swapped(&self) -> Self {
        Self { h_b: self.h_e.clone(), h_e: self.h_b.clone() }
    }
}

/// ULA steering vector with entries `exp(j 2 pi d n cos(theta)) / sqrt(N)`.
pub fn steering_vector(n_antennas: usize, theta_deg: f64, spacing_over_lambda: f64) -> ComplexVec {
    assert!(n_antennas >= 1, "steering vector needs at least one element");
    let amp = 1.0 / (n_antennas as f64).sqrt();
    let step = 2.0 * PI * spacing_over_lambda * theta_deg.to_radians().cos();
    ComplexVec::from_fn(n_antennas, |n| Complex64::from_polar(amp, step * n as f64))
}

pub fn build_channels(cfg: &SystemConfig) -> ChannelPair {
    ChannelPair {
        h_b: steering_vector(cfg.n_antennas, cfg.theta_b_deg, cfg.spacing_over_lambda),
        h_e: steering_vector(cfg.n_antennas, cfg.theta_e_deg, cfg.spacing_over_lambda),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_element() {
        let h = steering_vector(1, 37.0, 0.5);
        assert_eq!(h.as_slice(), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn broadside_has_zero_phase() {
        let h = steering_vector(4, 90.0, 0.5);
        for z in h.iter() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sixty_degrees_is_quarter_turn() {
        let h = steering_vector(2, 60.0, 0.5);
        let s = 1.0 / 2f64.sqrt();
        assert!((h[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((h[1] - Complex64::new(0.0, s)).norm() < 1e-15);
    }

    #[test]
    fn single_element_loses_directivity() {
        let cp = build_channels(&SystemConfig::reference(1, 10.0));
        assert_eq!(cp.h_b, cp.h_e);
        assert_eq!(cp.h_b.as_slice(), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn equal_directions_give_identical_channels() {
        let mut cfg = SystemConfig::reference(16, 10.0);
        cfg.theta_e_deg = cfg.theta_b_deg;
        let cp = build_channels(&cfg);
        assert_eq!(cp.h_b, cp.h_e);
        assert!(cfg.is_zero_secrecy_geometry());
    }

    #[test]
    fn correlation_matches_dirichlet_kernel() {
        let cfg = SystemConfig::reference(64, 15.0);
        let cp = build_channels(&cfg);
        let n = 64.0;
        let x = PI * 0.5 * (45f64.to_radians().cos() - 30f64.to_radians().cos());
        let closed = ((n * x).sin() / x.sin()).abs() / n;
        let direct = cp.h_b.dot(&cp.h_e).norm();
        assert!((direct - closed).abs() < 1e-12, "{direct} vs {closed}");
    }

    #[test]
    fn noise_power_from_snr() {
        let cfg = SystemConfig::reference(8, 20.0);
        assert!((cfg.total_power_w() - 1e4).abs() < 1e-9);
        assert!((cfg.noise_power_w() - 100.0).abs() < 1e-9);
        assert!((cfg.noise_to_power() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn violations_listed() {
        let mut cfg = SystemConfig::reference(0, 10.0);
        cfg.theta_b_deg = 180.0;
        cfg.spacing_over_lambda = 0.0;
        let v = cfg.violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(SystemConfig::reference(64, 15.0).violations().is_empty());
    }

    proptest! {
        #[test]
        fn unit_norm(n in 1usize..200, theta in -720.0f64..720.0, d in 0.05f64..2.0) {
            let h = steering_vector(n, theta, d);
            prop_assert!((h.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn periodic_and_conjugate_symmetric(n in 1usize..64, theta in 0.5f64..179.5, d in 0.1f64..1.0) {
            let h = steering_vector(n, theta, d);
            let wrapped = steering_vector(n, theta + 360.0, d);
            prop_assert!(h.max_abs_diff(&wrapped) < 1e-9);
            // cos(180 - theta) = -cos(theta)
            let mirrored = steering_vector(n, 180.0 - theta, d);
            prop_assert!(mirrored.max_abs_diff(&h.conj()) < 1e-9);
        }

        #[test]
        fn correlation_at_most_one(n in 2usize..64, tb in 1.0f64..179.0, te in 1.0f64..179.0) {
            let hb = steering_vector(n, tb, 0.5);
            let he = steering_vector(n, te, 0.5);
            let c = hb.dot(&he).norm();
            prop_assert!(c <= 1.0 + 1e-12);
            if (tb.to_radians().cos() - te.to_radians().cos()).abs() > 1e-3 {
                prop_assert!(c < 1.0);
            }
        }
    }
}
