use serde::{Deserialize, Serialize};

use super::{adapt_step, quantize_phase, FehlbergStepper, IntegratorError, LagonnDynamics, Mode, OdeSystem};
use crate::cnf::{Assignment, Instance};
use crate::lagrange::{kappa_with, PhaseState, SystemConfig};
use crate::rng::initial_state;
use crate::Real;

/// Stopping threshold on the smooth cost: below it every clause holds.
pub const SOLVED_THRESHOLD: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy<T> {
    Fixed(T),
    /// Adaptive control with tolerated error `epsilon`, starting from `dt0`.
    Adaptive { epsilon: T, dt0: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions<T> {
    pub mode: Mode,
    pub t_max: T,
    pub dt: DtPolicy<T>,
    /// Snap every phase to `n_states` levels after each step.
    pub n_states: Option<usize>,
    /// Stop as soon as the cost drops below 0.125.
    pub stop_on_solve: bool,
    /// Stop when `max |φ̇|` falls below this; 0 disables the check.
    pub fixed_point_tol: T,
}

impl<T: Real> Default for TrialOptions<T> {
    fn default() -> Self {
        Self {
            mode: Mode::Lagonn,
            t_max: T::lit(1000.0),
            dt: DtPolicy::Fixed(T::lit(0.15)),
            n_states: None,
            stop_on_solve: true,
            fixed_point_tol: T::lit(1e-6),
        }
    }
}

impl<T: Real> DtPolicy<T> {
    pub fn cast<U: Real>(&self) -> DtPolicy<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        match *self {
            DtPolicy::Fixed(dt) => DtPolicy::Fixed(c(dt)),
            DtPolicy::Adaptive { epsilon, dt0 } => DtPolicy::Adaptive {
                epsilon: c(epsilon),
                dt0: c(dt0),
            },
        }
    }
}

impl<T: Real> TrialOptions<T> {
    pub fn cast<U: Real>(&self) -> TrialOptions<U> {
        TrialOptions {
            mode: self.mode,
            t_max: U::lit(self.t_max.to_f64_lossy()),
            dt: self.dt.cast(),
            n_states: self.n_states,
            stop_on_solve: self.stop_on_solve,
            fixed_point_tol: U::lit(self.fixed_point_tol.to_f64_lossy()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Solved,
    FixedPoint,
    TimeLimit,
    /// Step budget of a discrete solver exhausted, or annealing schedule ended.
    Exhausted,
}

/// Outcome of one trial of any solver. Times are oscillation cycles for
/// the oscillator solvers and attempted flips for the discrete ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub solved: bool,
    pub stop: StopReason,
    pub stop_time: f64,
    /// Cost at termination: `κ` for oscillators, unsatisfied clauses otherwise.
    pub final_cost: f64,
    pub min_cost: f64,
    /// Unsatisfied clauses of the final (rounded) assignment.
    pub unsat: usize,
    pub steps: u64,
    pub rejected_steps: u64,
    /// First time the cost reached a solution, if ever.
    pub first_solution: Option<f64>,
    /// Cost never dropped below M/2 during the run.
    pub unstable: bool,
    pub assignment: Assignment,
}

impl TrialResult {
    /// Whether a solution was found no later than `budget`.
    pub fn solved_within(&self, budget: f64) -> bool {
        self.first_solution.is_some_and(|t| t <= budget)
    }
}

/// Per-step observation handed to trajectory observers.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'s, T> {
    pub step: u64,
    pub t: T,
    pub dt: T,
    pub kappa: T,
    pub lagrange: T,
    pub local_error: T,
    pub phases: &'s [T],
}

/// Step-by-step driver over the packed state `[φ_x; φ_λ]`.
pub struct Simulator<'a, T: Real> {
    sys: LagonnDynamics<'a, T>,
    stepper: FehlbergStepper<T>,
    y: Vec<T>,
    t: T,
    t0: T,
    dt: T,
    policy: DtPolicy<T>,
    n_states: Option<usize>,
    steps: u64,
    rejected: u64,
    soft: Vec<T>,
    last_error: T,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(
        inst: &'a Instance,
        config: SystemConfig<T>,
        mode: Mode,
        policy: DtPolicy<T>,
        init: &PhaseState<T>,
        n_states: Option<usize>,
    ) -> Result<Self, IntegratorError> {
        init.check_dims(inst)?;
        let dt = match policy {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Adaptive { dt0, epsilon } => {
                if !(epsilon > T::zero()) {
                    return Err(IntegratorError::InvalidStep);
                }
                dt0
            }
        };
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(IntegratorError::InvalidStep);
        }
        if let Some(n) = n_states {
            if n < 2 {
                return Err(IntegratorError::InvalidStateCount(n));
            }
        }
        let sys = LagonnDynamics::new(inst, config, mode)?;
        let mut y = init.packed();
        if let Some(n) = n_states {
            y.iter_mut().for_each(|p| *p = quantize_phase(*p, n));
        }
        Ok(Self {
            stepper: FehlbergStepper::new(sys.dim()),
            sys,
            y,
            t: init.t,
            t0: init.t,
            dt,
            policy,
            n_states,
            steps: 0,
            rejected: 0,
            soft: vec![T::zero(); inst.num_vars()],
            last_error: T::zero(),
        })
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rejected_steps(&self) -> u64 {
        self.rejected
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn last_local_error(&self) -> T {
        self.last_error
    }

    pub fn phases(&self) -> &[T] {
        &self.y
    }

    pub fn phi_x(&self) -> &[T] {
        &self.y[..self.sys.instance().num_vars()]
    }

    pub fn state(&self) -> PhaseState<T> {
        PhaseState::from_packed(&self.y, self.sys.instance().num_vars(), self.t)
    }

    pub fn kappa(&mut self) -> T {
        let n = self.sys.instance().num_vars();
        let beta = self.sys.config().beta;
        kappa_with(self.sys.instance(), &self.y[..n], beta, &mut self.soft)
    }

    pub fn lagrange_value(&mut self) -> T {
        let inst = self.sys.instance();
        let n = inst.num_vars();
        let (x, lam) = self.y.split_at(n);
        self.sys.workspace().lagrange_value(inst, x, lam)
    }

    /// `max_j |φ̇_j|` at the start of the last accepted step.
    pub fn last_max_rate(&self) -> T {
        self.stepper
            .start_derivative()
            .iter()
            .fold(T::zero(), |m, d| m.max(d.abs()))
    }

    /// Advances by one accepted step. Fixed-step runs keep the clock at
    /// `t0 + steps·dt` so it does not drift.
    pub fn step(&mut self) -> Result<(), IntegratorError> {
        loop {
            let err = self.stepper.step(&mut self.sys, self.t, &self.y, self.dt);
            let (dt_next, accept) = match self.policy {
                DtPolicy::Fixed(_) => (self.dt, true),
                DtPolicy::Adaptive { epsilon, .. } => {
                    let (next, ok) = adapt_step(self.dt, err, epsilon);
                    // At the floor there is nothing smaller to retry with.
                    (next, ok || self.dt <= T::lit(super::MIN_DT))
                }
            };
            if !accept {
                self.rejected += 1;
                self.dt = dt_next;
                continue;
            }
            let next = self.stepper.solution();
            if !next.iter().all(|v| v.is_finite()) {
                return Err(IntegratorError::NonFiniteState {
                    t: self.t.to_f64_lossy(),
                });
            }
            self.y.copy_from_slice(next);
            if let Some(n) = self.n_states {
                self.y.iter_mut().for_each(|p| *p = quantize_phase(*p, n));
            }
            self.steps += 1;
            self.t = match self.policy {
                DtPolicy::Fixed(dt) => self.t0 + T::lit(self.steps as f64) * dt,
                DtPolicy::Adaptive { .. } => self.t + self.dt,
            };
            self.last_error = err;
            self.dt = dt_next;
            return Ok(());
        }
    }
}

/// Runs one trial from uniform random phases drawn from `seed`.
pub fn run_trial<T: Real>(
    inst: &Instance,
    config: &SystemConfig<T>,
    opts: &TrialOptions<T>,
    seed: u64,
) -> Result<TrialResult, IntegratorError> {
    let init = initial_state(inst, seed);
    run_trial_from(inst, config, opts, &init, None)
}

/// Runs one trial from `init`, calling `observer` after every accepted step.
pub fn run_trial_from<T: Real>(
    inst: &Instance,
    config: &SystemConfig<T>,
    opts: &TrialOptions<T>,
    init: &PhaseState<T>,
    mut observer: Option<&mut dyn FnMut(&StepRecord<'_, T>)>,
) -> Result<TrialResult, IntegratorError> {
    if !(opts.t_max > T::zero()) {
        return Err(IntegratorError::InvalidStep);
    }
    let mut sim = Simulator::new(inst, *config, opts.mode, opts.dt, init, opts.n_states)?;
    let threshold = T::lit(SOLVED_THRESHOLD);
    let max_steps = match opts.dt {
        DtPolicy::Fixed(dt) => Some((opts.t_max / dt).floor().to_u64().unwrap_or(u64::MAX)),
        DtPolicy::Adaptive { .. } => None,
    };
    let mut kappa = sim.kappa();
    let mut min_cost = kappa;
    let mut first_solution = None;
    let stop = loop {
        let done = match max_steps {
            Some(n) => sim.steps() >= n,
            None => sim.t() >= opts.t_max,
        };
        if done {
            break StopReason::TimeLimit;
        }
        let dt = sim.dt();
        sim.step()?;
        kappa = sim.kappa();
        min_cost = min_cost.min(kappa);
        if let Some(observe) = observer.as_deref_mut() {
            let lagrange = sim.lagrange_value();
            observe(&StepRecord {
                step: sim.steps(),
                t: sim.t(),
                dt,
                kappa,
                lagrange,
                local_error: sim.last_local_error(),
                phases: sim.phases(),
            });
        }
        if kappa < threshold {
            if first_solution.is_none() {
                first_solution = Some(sim.t().to_f64_lossy());
            }
            if opts.stop_on_solve {
                break StopReason::Solved;
            }
        }
        if opts.fixed_point_tol > T::zero() && sim.last_max_rate() < opts.fixed_point_tol {
            break StopReason::FixedPoint;
        }
    };
    let assignment = Assignment::from_phases(sim.phi_x());
    let unsat = inst.count_unsat(assignment.spins());
    let solved = kappa < threshold;
    debug_assert!(!solved || unsat == 0);
    Ok(TrialResult {
        solved,
        stop,
        stop_time: sim.t().to_f64_lossy(),
        final_cost: kappa.to_f64_lossy(),
        min_cost: min_cost.to_f64_lossy(),
        unsat,
        steps: sim.steps(),
        rejected_steps: sim.rejected_steps(),
        first_solution,
        unstable: !solved && min_cost.to_f64_lossy() >= inst.num_clauses() as f64 / 2.0,
        assignment,
    })
}
