//! Predictor/corrector integration of the oscillator dynamics.
//!
//! One step costs three right-hand-side evaluations:
//!
//! ```text
//! f1 = f(t, y)
//! f2 = f(t + dt, y + dt·f1)
//! f3 = f(t + dt/2, y + dt·(f1 + f2)/4)
//! predictor  y_p = y + dt·(f1 + f2)/2          (Heun)
//! corrector  y'  = y + dt·(f1 + f2 + 4·f3)/6   (Simpson)
//! ```
//!
//! The RMS gap between predictor and corrector is the local error used by
//! [`adapt_step`].

mod dynamics;
mod trial;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dynamics::{derivative, LagonnDynamics, Mode};
pub use trial::{
    run_trial, run_trial_from, DtPolicy, Simulator, StepRecord, StopReason, TrialOptions, TrialResult,
};

use crate::cnf::Instance;
use crate::lagrange::{LagrangeError, PhaseState, SystemConfig};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("number of phase states must be at least 2, got {0}")]
    InvalidStateCount(usize),
    #[error("time step must be positive and finite")]
    InvalidStep,
    #[error(transparent)]
    Lagrange(#[from] LagrangeError),
}

/// Right-hand side `dy/dt = f(t, y)` of an autonomous-or-not ODE.
pub trait OdeSystem<T> {
    fn dim(&self) -> usize;
    fn eval(&mut self, t: T, y: &[T], dy: &mut [T]);
}

/// Scratch space for [`fehlberg`](FehlbergStepper::step) steps.
#[derive(Debug, Clone)]
pub struct FehlbergStepper<T> {
    f1: Vec<T>,
    f2: Vec<T>,
    f3: Vec<T>,
    tmp: Vec<T>,
    next: Vec<T>,
}

impl<T: Real> FehlbergStepper<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::zero(); dim];
        Self {
            f1: z.clone(),
            f2: z.clone(),
            f3: z.clone(),
            tmp: z.clone(),
            next: z,
        }
    }

    /// Computes one step from `(t, y)`; the corrector is available through
    /// [`solution`](Self::solution). Returns the local error estimate.
    pub fn step<S: OdeSystem<T>>(&mut self, sys: &mut S, t: T, y: &[T], dt: T) -> T {
        let n = y.len();
        let half = T::lit(0.5);
        let quarter = T::lit(0.25);
        let sixth = T::one() / T::lit(6.0);
        let four = T::lit(4.0);

        sys.eval(t, y, &mut self.f1);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.f1[i];
        }
        sys.eval(t + dt, &self.tmp, &mut self.f2);
        for i in 0..n {
            self.tmp[i] = y[i] + dt * (self.f1[i] + self.f2[i]) * quarter;
        }
        sys.eval(t + dt * half, &self.tmp, &mut self.f3);

        let mut sq = T::zero();
        for i in 0..n {
            let s12 = self.f1[i] + self.f2[i];
            let pred = y[i] + dt * s12 * half;
            let corr = y[i] + dt * (s12 + four * self.f3[i]) * sixth;
            self.next[i] = corr;
            let d = pred - corr;
            sq += d * d;
        }
        if n == 0 {
            return T::zero();
        }
        (sq / T::lit(n as f64)).sqrt()
    }

    pub fn solution(&self) -> &[T] {
        &self.next
    }

    /// `f(t, y)` at the start of the last step.
    pub fn start_derivative(&self) -> &[T] {
        &self.f1
    }
}

/// Result of a single step on the LagONN system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome<T> {
    pub state: PhaseState<T>,
    pub dt_next: T,
    pub local_error: T,
}

/// One fixed-size step of the network dynamics from `state`.
pub fn fehlberg_step<T: Real>(
    inst: &Instance,
    state: &PhaseState<T>,
    dt: T,
    config: &SystemConfig<T>,
    mode: Mode,
) -> Result<StepOutcome<T>, IntegratorError> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(IntegratorError::InvalidStep);
    }
    state.check_dims(inst)?;
    let mut sys = LagonnDynamics::new(inst, *config, mode)?;
    let mut stepper = FehlbergStepper::new(sys.dim());
    let y = state.packed();
    let err = stepper.step(&mut sys, state.t, &y, dt);
    let next = stepper.solution();
    if !next.iter().all(|v| v.is_finite()) {
        return Err(IntegratorError::NonFiniteState {
            t: state.t.to_f64_lossy(),
        });
    }
    Ok(StepOutcome {
        state: PhaseState::from_packed(next, inst.num_vars(), state.t + dt),
        dt_next: dt,
        local_error: err,
    })
}

pub const MIN_DT: f64 = 1e-6;
pub const MAX_DT: f64 = 1.0;

/// Step-size control: `Γ = sqrt(dt·ε/e_r)`, accept iff `Γ ≥ 1`, next step
/// `0.9·dt·Γ` clamped to `[1e-6, 1]`. A zero error estimate accepts and at
/// most doubles the step.
pub fn adapt_step<T: Real>(dt: T, local_error: T, epsilon: T) -> (T, bool) {
    let lo = T::lit(MIN_DT);
    let hi = T::lit(MAX_DT);
    if local_error == T::zero() {
        return ((dt + dt).min(hi), true);
    }
    let gamma = (dt * epsilon / local_error).sqrt();
    let next = (T::lit(0.9) * dt * gamma).max(lo).min(hi);
    (next, gamma >= T::one())
}

/// Snaps `phi` to the nearest point of the grid `2πk/n_states` (ties to
/// even `k`), returned in `[0, 2π)`.
pub fn quantize_phase<T: Real>(phi: T, n_states: usize) -> T {
    let n = T::lit(n_states as f64);
    let step = T::TAU() / n;
    let k = (phi / step).round_ties_even() % n;
    let k = if k < T::zero() { k + n } else { k };
    let k = if k >= n { T::zero() } else { k };
    k * step
}

pub fn quantize_phases<T: Real>(state: &PhaseState<T>, n_states: usize) -> Result<PhaseState<T>, IntegratorError> {
    if n_states < 2 {
        return Err(IntegratorError::InvalidStateCount(n_states));
    }
    let q = |v: &Vec<T>| v.iter().map(|&p| quantize_phase(p, n_states)).collect();
    Ok(PhaseState {
        phi_x: q(&state.phi_x),
        phi_lambda: q(&state.phi_lambda),
        t: state.t,
    })
}
