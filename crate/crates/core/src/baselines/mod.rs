//! Discrete comparison solvers over the same [`Instance`] model:
//! SASAT simulated annealing and WalkSAT.

mod sasat;
mod walksat;

use thiserror::Error;

pub use sasat::{acceptance_probability, sasat_run, sasat_run_traced, sasat_temperature, InitAssignment, SasatConfig, SasatTraceRow};
pub use walksat::{walksat_run, WalksatConfig};

use crate::cnf::{Assignment, CnfError, Instance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Change in the number of unsatisfied clauses if `var` were flipped.
/// Only the clauses containing `var` are inspected.
pub fn flip_delta(inst: &Instance, a: &Assignment, var: usize) -> Result<i64, CnfError> {
    inst.check_len(a)?;
    if var >= inst.num_vars() {
        return Err(CnfError::IndexOutOfRange {
            index: var,
            num_vars: inst.num_vars(),
        });
    }
    let spins = a.spins();
    let mut delta = 0i64;
    for occ in inst.occurrences(var) {
        let clause = &inst.clauses()[occ.clause];
        let lit = clause.lits()[occ.pos as usize];
        let others_true = clause
            .lits()
            .iter()
            .enumerate()
            .any(|(p, l)| p != occ.pos as usize && l.is_true(spins[l.var]));
        if others_true {
            continue;
        }
        // Clause hinges on this literal alone.
        delta += if lit.is_true(spins[var]) { 1 } else { -1 };
    }
    Ok(delta)
}

/// Assignment plus per-clause true-literal counters and the set of
/// unsatisfied clauses, updated in O(degree) per flip.
#[derive(Debug, Clone)]
pub(crate) struct SlsState<'a> {
    inst: &'a Instance,
    spins: Vec<i8>,
    true_count: Vec<u8>,
    unsat: Vec<usize>,
    unsat_pos: Vec<usize>,
}

const NOT_LISTED: usize = usize::MAX;

impl<'a> SlsState<'a> {
    pub fn new(inst: &'a Instance, spins: Vec<i8>) -> Self {
        let mut s = Self {
            inst,
            spins,
            true_count: vec![0; inst.num_clauses()],
            unsat: Vec::new(),
            unsat_pos: vec![NOT_LISTED; inst.num_clauses()],
        };
        for (ci, c) in inst.clauses().iter().enumerate() {
            let k = c.lits().iter().filter(|l| l.is_true(s.spins[l.var])).count() as u8;
            s.true_count[ci] = k;
            if k == 0 {
                s.push_unsat(ci);
            }
        }
        s
    }

    fn push_unsat(&mut self, ci: usize) {
        self.unsat_pos[ci] = self.unsat.len();
        self.unsat.push(ci);
    }

    fn remove_unsat(&mut self, ci: usize) {
        let pos = self.unsat_pos[ci];
        let last = *self.unsat.last().unwrap();
        self.unsat.swap_remove(pos);
        if last != ci {
            self.unsat_pos[last] = pos;
        }
        self.unsat_pos[ci] = NOT_LISTED;
    }

    pub fn num_unsat(&self) -> usize {
        self.unsat.len()
    }

    pub fn unsat_clauses(&self) -> &[usize] {
        &self.unsat
    }

    /// Satisfied clauses that flipping `var` would falsify.
    pub fn breaks(&self, var: usize) -> usize {
        self.inst
            .occurrences(var)
            .iter()
            .filter(|occ| {
                self.true_count[occ.clause] == 1
                    && self.inst.clauses()[occ.clause].lits()[occ.pos as usize].is_true(self.spins[var])
            })
            .count()
    }

    /// Unsatisfied clauses that flipping `var` would repair.
    pub fn makes(&self, var: usize) -> usize {
        self.inst
            .occurrences(var)
            .iter()
            .filter(|occ| self.true_count[occ.clause] == 0)
            .count()
    }

    pub fn delta(&self, var: usize) -> i64 {
        self.breaks(var) as i64 - self.makes(var) as i64
    }

    pub fn flip(&mut self, var: usize) {
        let inst = self.inst;
        for occ in inst.occurrences(var) {
            let lit = inst.clauses()[occ.clause].lits()[occ.pos as usize];
            if lit.is_true(self.spins[var]) {
                self.true_count[occ.clause] -= 1;
                if self.true_count[occ.clause] == 0 {
                    self.push_unsat(occ.clause);
                }
            } else {
                self.true_count[occ.clause] += 1;
                if self.true_count[occ.clause] == 1 {
                    self.remove_unsat(occ.clause);
                }
            }
        }
        self.spins[var] = -self.spins[var];
    }

    pub fn assignment(&self) -> Assignment {
        Assignment::new(self.spins.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, random_3sat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flip_delta_examples() {
        let inst = parse_dimacs("p cnf 3 1\n1 2 3 0").unwrap();
        let a = Assignment::new(vec![1, -1, -1]);
        assert_eq!(flip_delta(&inst, &a, 0).unwrap(), 1);
        let mut b = a.clone();
        b.flip(0);
        assert_eq!(flip_delta(&inst, &b, 0).unwrap(), -1);
        assert!(matches!(
            flip_delta(&inst, &a, 3),
            Err(CnfError::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn incremental_state_tracks_full_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_3sat(15, 64, &mut rng);
        let spins: Vec<i8> = (0..15).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let mut st = SlsState::new(&inst, spins);
        for _ in 0..500 {
            let v = rng.gen_range(0..15);
            let a = st.assignment();
            let before = inst.evaluate(&a).unwrap();
            assert_eq!(st.num_unsat(), before);
            assert_eq!(st.delta(v), flip_delta(&inst, &a, v).unwrap());
            st.flip(v);
            assert_eq!(inst.evaluate(&st.assignment()).unwrap() as i64 - before as i64, flip_delta(&inst, &a, v).unwrap());
        }
    }
}
