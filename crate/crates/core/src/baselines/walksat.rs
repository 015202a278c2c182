//! WalkSAT (SKC variant) with zero-damage flips.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BaselineError, SlsState};
use crate::cnf::Instance;
use crate::integrator::{StopReason, TrialResult};
use crate::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalksatConfig {
    /// Probability of a random-walk move when no zero-damage flip exists.
    pub noise_p: f64,
    pub max_flips: u64,
}

impl Default for WalksatConfig {
    fn default() -> Self {
        Self {
            noise_p: 0.5,
            max_flips: 1_000_000,
        }
    }
}

pub fn walksat_run(inst: &Instance, config: &WalksatConfig, seed: u64) -> Result<TrialResult, BaselineError> {
    if !(0.0..=1.0).contains(&config.noise_p) {
        return Err(BaselineError::InvalidConfig("noise_p must lie in [0, 1]".into()));
    }
    let mut rng = trial_rng(seed);
    let spins = (0..inst.num_vars())
        .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .collect();
    let mut state = SlsState::new(inst, spins);
    let mut flips = 0u64;
    let mut min_cost = state.num_unsat();
    let mut ties: Vec<usize> = Vec::with_capacity(3);

    while state.num_unsat() > 0 && flips < config.max_flips {
        let unsat = state.unsat_clauses();
        let ci = unsat[rng.gen_range(0..unsat.len())];
        let vars = inst.clauses()[ci].lits().map(|l| l.var);
        let breaks = vars.map(|v| state.breaks(v));
        let best = *breaks.iter().min().unwrap();
        ties.clear();
        let var = if best == 0 {
            ties.extend((0..3).filter(|&k| breaks[k] == 0).map(|k| vars[k]));
            *ties.choose(&mut rng).unwrap()
        } else if rng.gen_bool(config.noise_p) {
            vars[rng.gen_range(0..3)]
        } else {
            ties.extend((0..3).filter(|&k| breaks[k] == best).map(|k| vars[k]));
            *ties.choose(&mut rng).unwrap()
        };
        state.flip(var);
        flips += 1;
        min_cost = min_cost.min(state.num_unsat());
    }

    let solved = state.num_unsat() == 0;
    Ok(TrialResult {
        solved,
        stop: if solved {
            StopReason::Solved
        } else {
            StopReason::Exhausted
        },
        stop_time: flips as f64,
        final_cost: state.num_unsat() as f64,
        min_cost: min_cost as f64,
        unsat: state.num_unsat(),
        steps: flips,
        rejected_steps: 0,
        first_solution: solved.then_some(flips as f64),
        unstable: false,
        assignment: state.assignment(),
    })
}
