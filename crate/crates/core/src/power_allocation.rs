//! Closed-form power split between confidential message and AN.
//!
//! For fixed vectors the secrecy rate is `log2 phi(beta)` with
//! `phi = (I b^2 + J b + K) / (L b^2 + M b + K)`. The stationary points of
//! `phi` are the roots of `(IM - JL) b^2 + 2K(I - L) b + K(J - M)`, so the
//! optimum over `[0, 1]` is found among at most two interior roots and the
//! endpoints.
//!
//! Coefficients are stored with the transmit power factored out (every
//! coefficient divided by `P_s^2`), which leaves `phi` unchanged.

use crate::channel::{ChannelPair, SystemConfig};
use crate::numerics::ComplexVec;

/// Which case of the root analysis applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaBranch {
    /// `I = L` and `J = M`: `phi` is constant.
    Flat,
    /// `IM - JL = 0`; `beta3` is the single stationary point when it exists.
    Linear { beta3: Option<f64> },
    /// `IM - JL != 0`, non-negative discriminant.
    Quadratic { beta1: f64, beta2: f64 },
    /// `IM - JL != 0`, negative discriminant: `phi` is monotone.
    Monotone { increasing: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaQuadratic {
    pub i: f64,
    pub j: f64,
    pub k: f64,
    pub l: f64,
    pub m: f64,
    /// `K^2 (I - L)^2 - K (IM - JL)(J - M)`.
    pub delta: f64,
    pub branch: PaBranch,
    /// Stationary points strictly inside `(0, 1)`.
    pub roots: Vec<f64>,
}

impl PaQuadratic {
    pub fn from_coefficients(i: f64, j: f64, k: f64, l: f64, m: f64) -> Self {
        let lead = i * m - j * l;
        let delta = k * k * (i - l) * (i - l) - k * lead * (j - m);
        let scale = [i, j, k, l, m].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let flat = (i - l).abs() <= 1e-14 * scale && (j - m).abs() <= 1e-14 * scale;
        let linear = lead.abs() <= 1e-12 * (i * m).abs().max((j * l).abs());

        let branch = if flat {
            PaBranch::Flat
        } else if linear {
            let beta3 = (i != l).then(|| (m - j) / (2.0 * (i - l)));
            PaBranch::Linear { beta3 }
        } else if delta >= 0.0 {
            let (beta1, beta2) = quadratic_roots(lead, k * (i - l), k * (j - m), delta.sqrt());
            PaBranch::Quadratic { beta1, beta2 }
        } else {
            PaBranch::Monotone { increasing: lead > 0.0 }
        };
        let interior = |b: f64| b > 0.0 && b < 1.0;
        let roots = match branch {
            PaBranch::Linear { beta3: Some(b) } if interior(b) => vec![b],
            PaBranch::Quadratic { beta1, beta2 } => [beta1, beta2].into_iter().filter(|&b| interior(b)).collect(),
            _ => Vec::new(),
        };
        Self { i, j, k, l, m, delta, branch, roots }
    }

    /// `a(beta) / b(beta)`.
    pub fn phi(&self, beta: f64) -> f64 {
        let num = (self.i * beta + self.j) * beta + self.k;
        let den = (self.l * beta + self.m) * beta + self.k;
        num / den
    }

    pub fn rate(&self, beta: f64) -> f64 {
        self.phi(beta).log2()
    }
}

/// Roots `(-h + sqrt_delta) / a` and `(-h - sqrt_delta) / a` of
/// `a x^2 + 2 h x + c`, computed without cancellation.
fn quadratic_roots(a: f64, h: f64, c: f64, sqrt_delta: f64) -> (f64, f64) {
    if h >= 0.0 {
        let q = -(h + sqrt_delta);
        let minus = q / a;
        let plus = if q != 0.0 { c / q } else { (-h + sqrt_delta) / a };
        (plus, minus)
    } else {
        let q = -h + sqrt_delta;
        (q / a, c / q)
    }
}

/// Coefficients for the given vectors, divided by `P_s^2`.
pub fn pa_coefficients(cp: &ChannelPair, v_b: &ComplexVec, v_an: &ComplexVec, cfg: &SystemConfig) -> PaQuadratic {
    let rho = cfg.noise_to_power();
    let bb = cp.h_b.projection_power(v_b);
    let ba = cp.h_b.projection_power(v_an);
    let eb = cp.h_e.projection_power(v_b);
    let ea = cp.h_e.projection_power(v_an);
    let i = ea * (ba - bb);
    let j = (bb - ba) * (ea + rho) - ea * (ba + rho);
    let k = (ba + rho) * (ea + rho);
    let l = ba * (ea - eb);
    let m = (eb - ea) * (ba + rho) - ba * (ea + rho);
    PaQuadratic::from_coefficients(i, j, k, l, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaSolution {
    pub beta: f64,
    pub phi: f64,
    /// `log2 phi(beta)`, unclamped.
    pub rate: f64,
    pub branch: PaBranch,
}

impl PaSolution {
    pub fn is_flat(&self) -> bool {
        self.branch == PaBranch::Flat
    }
}

/// Optimal `beta` in `[0, 1]`. Ties within `1e-12` (relative) go to the
/// larger `beta`.
pub fn optimize_beta(q: &PaQuadratic) -> PaSolution {
    let beta = match q.branch {
        PaBranch::Flat => 0.5,
        PaBranch::Monotone { increasing } => {
            if increasing {
                1.0
            } else {
                0.0
            }
        }
        PaBranch::Linear { .. } | PaBranch::Quadratic { .. } => {
            let mut candidates = vec![0.0, 1.0];
            candidates.extend(&q.roots);
            let best_phi = candidates.iter().map(|&b| q.phi(b)).fold(f64::MIN, f64::max);
            let slack = 1e-12 * best_phi.abs().max(1.0);
            candidates.into_iter().filter(|&b| q.phi(b) >= best_phi - slack).fold(0.0, f64::max)
        }
    };
    let phi = q.phi(beta);
    PaSolution { beta, phi, rate: phi.log2(), branch: q.branch }
}
