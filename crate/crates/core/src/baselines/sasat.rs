//! SASAT: sequential-sweep simulated annealing for SAT.
//!
//! Each sweep visits the variables in index order and flips variable `i`
//! with probability `1/(1 + exp(δ/T))`, where `δ` is the change in
//! unsatisfied clauses. The temperature of sweep `j` is
//! `T_max·exp(−j·decay_scale/N)`; a run ends once `T < T_min`, and up to
//! `max_trials` runs are made from fresh random assignments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BaselineError, SlsState};
use crate::cnf::Instance;
use crate::integrator::{StopReason, TrialResult};
use crate::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitAssignment {
    Random,
    /// First run starts from all-TRUE; restarts are random.
    AllTrue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasatConfig {
    pub max_trials: u32,
    pub max_temp: f64,
    pub min_temp: f64,
    pub decay_scale: f64,
    /// Global cap on attempted flips across all restarts.
    pub max_steps: Option<u64>,
    pub init: InitAssignment,
}

impl Default for SasatConfig {
    fn default() -> Self {
        Self {
            max_trials: 1,
            max_temp: 1.0,
            min_temp: 0.01,
            decay_scale: 0.2,
            max_steps: None,
            init: InitAssignment::Random,
        }
    }
}

impl SasatConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(self.max_temp > self.min_temp && self.min_temp > 0.0) {
            return Err(BaselineError::InvalidConfig(
                "need max_temp > min_temp > 0".into(),
            ));
        }
        if !(self.decay_scale > 0.0) {
            return Err(BaselineError::InvalidConfig("decay_scale must be positive".into()));
        }
        if self.max_trials == 0 {
            return Err(BaselineError::InvalidConfig("max_trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sigmoid flip probability.
pub fn acceptance_probability(delta: i64, temperature: f64) -> f64 {
    1.0 / (1.0 + (delta as f64 / temperature).exp())
}

pub fn sasat_temperature(sweep: u64, config: &SasatConfig, num_vars: usize) -> f64 {
    config.max_temp * (-(sweep as f64) * config.decay_scale / num_vars as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasatTraceRow {
    pub step: u64,
    pub cost: usize,
    pub temperature: f64,
}

pub fn sasat_run(inst: &Instance, config: &SasatConfig, seed: u64) -> Result<TrialResult, BaselineError> {
    sasat_run_traced(inst, config, seed, None)
}

/// As [`sasat_run`], reporting `(step, unsatisfied clauses, T)` after
/// every attempted flip.
pub fn sasat_run_traced(
    inst: &Instance,
    config: &SasatConfig,
    seed: u64,
    mut trace: Option<&mut dyn FnMut(SasatTraceRow)>,
) -> Result<TrialResult, BaselineError> {
    config.validate()?;
    let mut rng = trial_rng(seed);
    let n = inst.num_vars();
    let mut steps = 0u64;
    let mut first_solution = None;
    let mut min_cost = usize::MAX;
    let budget = config.max_steps.unwrap_or(u64::MAX);
    let mut last: Option<SlsState<'_>> = None;

    let finish = |state: &SlsState<'_>, stop, steps: u64, first: Option<u64>, min_cost: usize| TrialResult {
        solved: stop == StopReason::Solved,
        stop,
        stop_time: steps as f64,
        final_cost: state.num_unsat() as f64,
        min_cost: min_cost.min(state.num_unsat()) as f64,
        unsat: state.num_unsat(),
        steps,
        rejected_steps: 0,
        first_solution: first.map(|s| s as f64),
        unstable: false,
        assignment: state.assignment(),
    };

    for trial in 0..config.max_trials {
        let spins: Vec<i8> = match (trial, config.init) {
            (0, InitAssignment::AllTrue) => vec![1; n],
            _ => (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect(),
        };
        let mut state = SlsState::new(inst, spins);
        min_cost = min_cost.min(state.num_unsat());
        if state.num_unsat() == 0 && first_solution.is_none() {
            first_solution = Some(steps);
        }
        let mut sweep = 0u64;
        let mut temperature = config.max_temp;
        while temperature >= config.min_temp {
            if state.num_unsat() == 0 {
                return Ok(finish(&state, StopReason::Solved, steps, first_solution, min_cost));
            }
            temperature = sasat_temperature(sweep, config, n);
            for var in 0..n {
                if steps >= budget {
                    return Ok(finish(&state, StopReason::Exhausted, steps, first_solution, min_cost));
                }
                let delta = state.delta(var);
                if rng.gen::<f64>() < acceptance_probability(delta, temperature) {
                    state.flip(var);
                }
                steps += 1;
                let cost = state.num_unsat();
                min_cost = min_cost.min(cost);
                if cost == 0 && first_solution.is_none() {
                    first_solution = Some(steps);
                }
                if let Some(f) = trace.as_deref_mut() {
                    f(SasatTraceRow {
                        step: steps,
                        cost,
                        temperature,
                    });
                }
            }
            sweep += 1;
        }
        last = Some(state);
    }
    let state = last.expect("at least one annealing run");
    Ok(finish(&state, StopReason::Exhausted, steps, first_solution, min_cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;

    #[test]
    fn sigmoid_examples() {
        assert_eq!(acceptance_probability(0, 0.37), 0.5);
        assert!(acceptance_probability(4, 0.01) < 1e-170);
        assert!(acceptance_probability(-4, 0.01) > 1.0 - 1e-15);
        for t in [0.01, 0.1, 1.0] {
            let p: Vec<f64> = (-5..=5).map(|d| acceptance_probability(d, t)).collect();
            assert!(p.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn schedule_decreases() {
        let cfg = SasatConfig::default();
        let temps: Vec<f64> = (0..50).map(|j| sasat_temperature(j, &cfg, 20)).collect();
        assert_eq!(temps[0], 1.0);
        assert!(temps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn invalid_config() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        let cfg = SasatConfig {
            min_temp: 2.0,
            ..SasatConfig::default()
        };
        assert!(sasat_run(&inst, &cfg, 0).is_err());
    }

    #[test]
    fn budget_is_respected() {
        let inst = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0").unwrap();
        let cfg = SasatConfig {
            max_steps: Some(0),
            init: InitAssignment::AllTrue,
            ..SasatConfig::default()
        };
        let r = sasat_run(&inst, &cfg, 1).unwrap();
        assert_eq!(r.steps, 0);
        assert!(!r.solved);
    }
}
