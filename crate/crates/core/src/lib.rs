//! Secrecy-rate maximization for directional-modulation transmitters.
//!
//! A transmitter with a uniform linear array sends a confidential message
//! along beamformer `v_b` and artificial noise along `v_an`, splitting its
//! power as `beta : 1 - beta`. [`ais::run_ais`] alternates between the three
//! closed-form or fixed-point sub-problems until the secrecy rate settles;
//! [`nsp::nsp_solution`] is the null-space-projection baseline it is
//! compared against. [`experiment`] drives parameter sweeps and writes CSV.

pub mod ais;
pub mod an_design;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod experiment;
pub mod nsp;
pub mod numerics;
pub mod power_allocation;
pub mod secrecy;

pub use ais::{run_ais, secure_ee, AisOutcome, IterationTrace};
pub use channel::{build_channels, steering_vector, ChannelPair, StopRule, SystemConfig, Tolerances};
pub use nsp::nsp_solution;
pub use numerics::{ComplexVec, HermitianMat};
pub use secrecy::{secrecy_rate, SolutionState};
