//! Oscillator Ising machine with Lagrange oscillators for 3-SAT.
//!
//! Boolean variables are encoded as oscillator phases (TRUE at 0, FALSE at
//! π). Each clause contributes a complex relaxation `Z_m` that vanishes
//! exactly when the clause holds on binary phases, and one extra Lagrange
//! oscillator `φ_λ,m` per clause turns the problem into a saddle search on
//!
//! ```text
//! L_T = Σ_m Re(e^{−iφ_λ,m} Z_m)
//! ```
//!
//! with gradient descent in the variable phases and ascent in the Lagrange
//! phases. The crate also carries the discrete baselines (simulated
//! annealing and WalkSAT), a time-to-solution benchmark harness and a small
//! phase-copying demo.
//!
//! All continuous code is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the common choices.

pub mod baselines;
pub mod bench;
pub mod clause_energy;
pub mod cnf;
pub mod copy_demo;
pub mod integrator;
pub mod lagrange;
pub mod rng;
mod scalar;

pub use scalar::{wrap_angle, Real};

pub use cnf::{evaluate_assignment, Assignment, ClauseType, CnfError, Instance, Literal};
pub use integrator::{run_trial, DtPolicy, Mode, StopReason, TrialOptions, TrialResult};
pub use lagrange::{PhaseState, SystemConfig};

pub type PhaseState64 = lagrange::PhaseState<f64>;
pub type PhaseState32 = lagrange::PhaseState<f32>;
pub type SystemConfig64 = lagrange::SystemConfig<f64>;
pub type SystemConfig32 = lagrange::SystemConfig<f32>;
pub type TrialOptions64 = integrator::TrialOptions<f64>;
pub type TrialOptions32 = integrator::TrialOptions<f32>;
pub type DtPolicy64 = integrator::DtPolicy<f64>;
pub type DtPolicy32 = integrator::DtPolicy<f32>;
pub type XyGraph64 = copy_demo::XyGraph<f64>;
pub type CopyMode64 = copy_demo::CopyMode<f64>;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
