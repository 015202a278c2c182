//! Uniform random 3-SAT generation and a small exact satisfiability check.
//!
//! The generator draws each clause as three distinct variables chosen
//! uniformly, each negated with probability 1/2, the same model as the
//! SATlib `uf` families. [`random_satisfiable_3sat`] keeps drawing until
//! [`find_model`] certifies the formula.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, Clause, Instance, Literal};

pub fn random_3sat<R: Rng + ?Sized>(num_vars: usize, num_clauses: usize, rng: &mut R) -> Instance {
    assert!(num_vars >= 3, "3-SAT needs at least 3 variables");
    let clauses = (0..num_clauses)
        .map(|_| {
            let vars = sample(rng, num_vars, 3);
            let lits = [0, 1, 2].map(|k| Literal {
                var: vars.index(k),
                negated: rng.gen_bool(0.5),
            });
            Clause::new(lits).expect("sampled variables are distinct")
        })
        .collect();
    Instance::new(num_vars, clauses).expect("generated instance is well formed")
}

/// Draws uniform random formulas from `seed` until one is satisfiable.
/// Returns the instance and the number of rejected draws.
pub fn random_satisfiable_3sat(num_vars: usize, num_clauses: usize, seed: u64) -> (Instance, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = 0;
    loop {
        let inst = random_3sat(num_vars, num_clauses, &mut rng);
        if find_model(&inst).is_some() {
            return (inst, rejected);
        }
        rejected += 1;
    }
}

/// Complete DPLL search with unit propagation. Meant for the small
/// instances used here (N ≲ 100), not as a general SAT solver.
pub fn find_model(inst: &Instance) -> Option<Assignment> {
    let mut vals = vec![0i8; inst.num_vars()];
    if dpll(inst, &mut vals) {
        Some(Assignment::new(
            vals.into_iter().map(|v| if v == 0 { 1 } else { v }).collect(),
        ))
    } else {
        None
    }
}

fn lit_value(l: Literal, vals: &[i8]) -> i8 {
    match vals[l.var] {
        0 => 0,
        s if l.is_true(s) => 1,
        _ => -1,
    }
}

fn make_true(l: Literal) -> i8 {
    if l.negated {
        -1
    } else {
        1
    }
}

fn dpll(inst: &Instance, vals: &mut [i8]) -> bool {
    let mut trail = Vec::new();
    let undo = |trail: &[usize], vals: &mut [i8]| {
        for &v in trail {
            vals[v] = 0;
        }
    };
    let branch = loop {
        let mut propagated = false;
        let mut shortest: Option<(usize, Literal)> = None;
        for c in inst.clauses() {
            let mut open = 0;
            let mut last_open = None;
            let mut sat = false;
            for &l in c.lits() {
                match lit_value(l, vals) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        open += 1;
                        last_open = Some(l);
                    }
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            match (open, last_open) {
                (0, _) => {
                    undo(&trail, vals);
                    return false;
                }
                (1, Some(l)) => {
                    vals[l.var] = make_true(l);
                    trail.push(l.var);
                    propagated = true;
                }
                (k, Some(l)) => {
                    if shortest.map_or(true, |(best, _)| k < best) {
                        shortest = Some((k, l));
                    }
                }
                _ => unreachable!(),
            }
        }
        if !propagated {
            break shortest;
        }
    };
    let Some((_, lit)) = branch else {
        return true;
    };
    for value in [make_true(lit), -make_true(lit)] {
        vals[lit.var] = value;
        if dpll(inst, vals) {
            return true;
        }
    }
    vals[lit.var] = 0;
    undo(&trail, vals);
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;

    fn brute_force_sat(inst: &Instance) -> bool {
        let n = inst.num_vars();
        (0u32..1 << n).any(|bits| {
            let spins: Vec<i8> = (0..n).map(|v| if bits >> v & 1 == 1 { 1 } else { -1 }).collect();
            inst.count_unsat(&spins) == 0
        })
    }

    #[test]
    fn dpll_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [0usize; 2];
        for _ in 0..200 {
            let inst = random_3sat(8, 50, &mut rng);
            let model = find_model(&inst);
            assert_eq!(model.is_some(), brute_force_sat(&inst));
            if let Some(a) = &model {
                assert_eq!(inst.evaluate(a).unwrap(), 0);
            }
            seen[model.is_some() as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
    }

    #[test]
    fn unsat_core_detected() {
        // All 8 sign patterns over three variables.
        let mut text = String::from("p cnf 3 8\n");
        for bits in 0..8 {
            let l: Vec<String> = (0..3)
                .map(|v| if bits >> v & 1 == 1 { format!("{}", v + 1) } else { format!("-{}", v + 1) })
                .collect();
            text.push_str(&format!("{} 0\n", l.join(" ")));
        }
        assert!(find_model(&parse_dimacs(&text).unwrap()).is_none());
    }

    #[test]
    fn satisfiable_generator_is_deterministic() {
        let (a, _) = random_satisfiable_3sat(20, 91, 5);
        let (b, _) = random_satisfiable_3sat(20, 91, 5);
        assert_eq!(a, b);
        assert_eq!(a.num_clauses(), 91);
        assert!(find_model(&a).is_some());
    }
}
