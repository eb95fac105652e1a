//! Artificial-noise projection vector design.
//!
//! For a fixed beamformer and power split the secrecy rate in `v_an` is
//! `log2(f(v))` with
//!
//! ```text
//! f(v) = (v^H C v / v^H D v) * (v^H E v / v^H F v)
//! ```
//!
//! Setting the gradient of `log f` to zero gives
//! `[C/(v^H C v) + E/(v^H E v)] v = [D/(v^H D v) + F/(v^H F v)] v`, which the
//! generalized power iteration (GPI) solves as a fixed point. Each update is
//! safeguarded so the objective never decreases.

use thiserror::Error;

use crate::channel::{ChannelPair, SystemConfig};
use crate::numerics::{dominant_eigenvector, ComplexVec, LowRankHermitian, PowerIteration};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnDesignError {
    #[error("AN power is zero (beta = {0}); AN design undefined")]
    ZeroAnPower(f64),
}

/// `C, D, E, F`, each `s I + h h^H` for one of the two channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AnQuadratics {
    pub c: LowRankHermitian,
    pub d: LowRankHermitian,
    pub e: LowRankHermitian,
    pub f: LowRankHermitian,
}

impl AnQuadratics {
    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    /// `f(v)`, the product of the two quotients.
    pub fn objective(&self, v: &ComplexVec) -> f64 {
        let (c, d, e, f) = self.forms(v);
        (c / d) * (e / f)
    }

    fn forms(&self, v: &ComplexVec) -> (f64, f64, f64, f64) {
        (self.c.quadratic_form(v), self.d.quadratic_form(v), self.e.quadratic_form(v), self.f.quadratic_form(v))
    }

    /// `(M(v), N(v))` with `M = C/(v^H C v) + E/(v^H E v)` and
    /// `N = D/(v^H D v) + F/(v^H F v)`.
    fn gradient_pencil(&self, v: &ComplexVec) -> (LowRankHermitian, LowRankHermitian) {
        let (c, d, e, f) = self.forms(v);
        let m = LowRankHermitian::linear_combination(&[(1.0 / c, &self.c), (1.0 / e, &self.e)]);
        let n = LowRankHermitian::linear_combination(&[(1.0 / d, &self.d), (1.0 / f, &self.f)]);
        (m, n)
    }

    /// `log f(w) - log f(v)`, with each quadratic-form difference taken as
    /// `Re((w - v)^H X (w + v))` so that tiny gains are not lost to rounding.
    pub fn log_gain(&self, v: &ComplexVec, w: &ComplexVec) -> f64 {
        let diff = w.sub(v);
        let sum = w.add(v);
        let term = |x: &LowRankHermitian| {
            let delta = diff.dot(&x.apply(&sum)).re;
            (delta / x.quadratic_form(v)).ln_1p()
        };
        term(&self.c) + term(&self.e) - term(&self.d) - term(&self.f)
    }

    /// `||M v - mu N v||` with `mu = v^H M v / v^H N v`.
    pub fn stationarity_residual(&self, v: &ComplexVec) -> f64 {
        let (m, n) = self.gradient_pencil(v);
        let mu = m.quadratic_form(v) / n.quadratic_form(v);
        m.apply(v).axpy(num_complex::Complex64::new(-mu, 0.0), &n.apply(v)).norm()
    }
}

pub fn an_quadratics(
    cp: &ChannelPair,
    v_b: &ComplexVec,
    beta: f64,
    cfg: &SystemConfig,
) -> Result<AnQuadratics, AnDesignError> {
    if beta >= 1.0 {
        return Err(AnDesignError::ZeroAnPower(beta));
    }
    let n = cp.dim();
    let noise = cfg.noise_to_power() / (1.0 - beta);
    let cm = beta / (1.0 - beta);
    let c_shift = cm * cp.h_b.projection_power(v_b) + noise;
    let d_shift = cm * cp.h_e.projection_power(v_b) + noise;
    Ok(AnQuadratics {
        c: LowRankHermitian::scaled_identity(n, c_shift).with_term(1.0, &cp.h_b),
        d: LowRankHermitian::scaled_identity(n, d_shift).with_term(1.0, &cp.h_e),
        e: LowRankHermitian::scaled_identity(n, noise).with_term(1.0, &cp.h_e),
        f: LowRankHermitian::scaled_identity(n, noise).with_term(1.0, &cp.h_b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpiStatus {
    /// Stationarity residual fell below the tolerance.
    Converged,
    /// No step length in the safeguard ladder increased the objective.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct GpiOutcome {
    pub v_an: ComplexVec,
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub status: GpiStatus,
    /// Objective after each accepted iterate, starting with `f(v_init)` and
    /// advanced by the accepted log-gains.
    pub history: Vec<f64>,
}

impl GpiOutcome {
    pub fn converged(&self) -> bool {
        self.status == GpiStatus::Converged
    }
}

const SAFEGUARD_HALVINGS: i32 = 20;

/// Maximizes `f(v)` over unit vectors from `v_init`.
pub fn gpi_optimize_van(q: &AnQuadratics, v_init: &ComplexVec, tol: f64, max_iter: usize) -> GpiOutcome {
    let mut v = v_init.normalized().expect("non-zero start vector").phase_normalized();
    let mut tracked = q.objective(&v);
    let mut history = vec![tracked];
    let mut residual = q.stationarity_residual(&v);
    let mut status = GpiStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < max_iter {
        if residual <= tol {
            status = GpiStatus::Converged;
            break;
        }
        iterations += 1;
        let (m, n) = q.gradient_pencil(&v);
        let raw = n
            .solve(&m.apply(&v))
            .expect("D and F are positive definite")
            .normalized()
            .expect("update is non-zero")
            .phase_aligned_to(&v);

        let mut accepted = None;
        for k in 0..=SAFEGUARD_HALVINGS {
            let t = 0.5f64.powi(k);
            let cand = if k == 0 { raw.clone() } else { v.axpy((t).into(), &raw.sub(&v)) };
            let Ok(cand) = cand.normalized() else { continue };
            let gain = q.log_gain(&v, &cand);
            if gain >= 0.0 {
                accepted = Some((cand, gain));
                break;
            }
        }
        let Some((next, gain)) = accepted else {
            status = GpiStatus::Stalled;
            break;
        };
        v = next.phase_normalized();
        tracked *= gain.exp();
        history.push(tracked);
        residual = q.stationarity_residual(&v);
    }
    if status == GpiStatus::MaxIterations && residual <= tol {
        status = GpiStatus::Converged;
    }
    GpiOutcome { objective: q.objective(&v), v_an: v, residual, iterations, status, history }
}

/// Maximizes `v^H h_e h_e^H v / v^H (h_b h_b^H + rho/(1-beta0) I) v`.
pub fn max_anlnr_init(cp: &ChannelPair, beta0: f64, cfg: &SystemConfig) -> ComplexVec {
    assert!((0.0..1.0).contains(&beta0), "beta0 must lie in [0, 1)");
    let n = cp.dim();
    let den = LowRankHermitian::scaled_identity(n, cfg.noise_to_power() / (1.0 - beta0)).with_term(1.0, &cp.h_b);
    let apply = |v: &ComplexVec| den.solve(&cp.h_e.scale(cp.h_e.dot(v))).expect("positive definite");
    let opts = PowerIteration {
        tol: cfg.tolerances.power_iteration_tol,
        max_iter: cfg.tolerances.power_iteration_max_iter,
        start: Some(cp.h_e.clone()),
    };
    match dominant_eigenvector(apply, n, &opts) {
        Ok(p) => p.vector,
        Err(e) => e.best.vector,
    }
}
