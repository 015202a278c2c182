//! 3-SAT formulas: literals, clauses, instances and Boolean assignments.
//!
//! Variables are 0-based internally. DIMACS' 1-based numbering is converted
//! at the parser boundary (see [`dimacs`]).

pub mod dimacs;
pub mod generate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dimacs::{load_dimacs, parse_dimacs, read_dimacs, write_dimacs};
pub use generate::{find_model, random_3sat, random_satisfiable_3sat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: malformed problem header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: clause has {found} literals, expected 3")]
    ClauseArity { line: usize, found: usize },
    #[error("line {line}: variable {var} appears twice in one clause")]
    DuplicateVarInClause { line: usize, var: usize },
    #[error("line {line}: variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { line: usize, var: i64, num_vars: usize },
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },
    #[error("formula has no clauses")]
    EmptyFormula,
    #[error("assignment has {found} spins, instance has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub const fn pos(var: usize) -> Self {
        Self {
            var,
            negated: false,
        }
    }

    pub const fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// Builds a literal from a nonzero 1-based DIMACS integer.
    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        let var = (x.unsigned_abs() - 1) as usize;
        Some(Self {
            var,
            negated: x < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Truth value of the literal when its variable has the given spin.
    #[inline]
    pub fn is_true(self, spin: i8) -> bool {
        (spin > 0) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var + 1)
        } else {
            write!(f, "x{}", self.var + 1)
        }
    }
}

/// The four canonical clause shapes, indexed by the number of negated
/// literals: `X∨Y∨Z`, `X̄∨Y∨Z`, `X̄∨Ȳ∨Z`, `X̄∨Ȳ∨Z̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseType {
    One,
    Two,
    Three,
    Four,
}

impl ClauseType {
    pub const ALL: [ClauseType; 4] = [Self::One, Self::Two, Self::Three, Self::Four];

    pub fn id(self) -> u8 {
        self.index() as u8 + 1
    }

    #[inline]
    pub(crate) fn index(self) -> usize {
        match self {
            Self::One => 0,
            Self::Two => 1,
            Self::Three => 2,
            Self::Four => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            3 => Some(Self::Three),
            4 => Some(Self::Four),
            _ => None,
        }
    }

    /// Negation pattern of the canonical positions (X, Y, Z).
    pub fn negations(self) -> [bool; 3] {
        let k = self.index();
        [k >= 1, k >= 2, k >= 3]
    }

    /// Truth of the canonical clause under spins bound to (X, Y, Z).
    pub fn is_satisfied(self, spins: [i8; 3]) -> bool {
        self.negations()
            .iter()
            .zip(spins)
            .any(|(&neg, s)| (s > 0) != neg)
    }
}

/// Disjunction of exactly three literals over distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    lits: [Literal; 3],
}

impl Clause {
    /// Returns `None` when two literals share a variable (duplicate or
    /// complementary pair).
    pub fn new(lits: [Literal; 3]) -> Option<Self> {
        let [a, b, c] = lits;
        if a.var == b.var || a.var == c.var || b.var == c.var {
            return None;
        }
        Some(Self { lits })
    }

    pub fn lits(&self) -> &[Literal; 3] {
        &self.lits
    }

    pub fn is_satisfied(&self, spins: &[i8]) -> bool {
        self.lits.iter().any(|l| l.is_true(spins[l.var]))
    }

    /// Canonical type and the permutation of positions that puts the
    /// negated literals first (stable within each group).
    pub fn normalize(&self) -> (ClauseType, [usize; 3]) {
        let mut perm = [0usize; 3];
        let mut k = 0;
        for neg_first in [true, false] {
            for (i, l) in self.lits.iter().enumerate() {
                if l.negated == neg_first {
                    perm[k] = i;
                    k += 1;
                }
            }
        }
        let negs = self.lits.iter().filter(|l| l.negated).count() as u8;
        (ClauseType::from_id(negs + 1).unwrap(), perm)
    }

    pub fn canonical(&self) -> CanonicalClause {
        let (kind, perm) = self.normalize();
        CanonicalClause {
            kind,
            vars: perm.map(|p| self.lits[p].var),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.lits;
        write!(f, "({a} ∨ {b} ∨ {c})")
    }
}

/// A clause rewritten as one of the four canonical types, with `vars`
/// bound to positions (X, Y, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalClause {
    pub kind: ClauseType,
    pub vars: [usize; 3],
}

/// Position of a variable inside a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub clause: usize,
    pub pos: u8,
}

/// A parsed 3-SAT formula. Immutable once built.
#[derive(Debug, Clone)]
pub struct Instance {
    num_vars: usize,
    clauses: Vec<Clause>,
    canonical: Vec<CanonicalClause>,
    occurrences: Vec<Vec<Occurrence>>,
    name: String,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses && self.name == other.name
    }
}

impl Instance {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::MalformedHeader {
                line: 0,
                reason: "variable count must be at least 1".into(),
            });
        }
        if clauses.is_empty() {
            return Err(CnfError::EmptyFormula);
        }
        let mut occurrences = vec![Vec::new(); num_vars];
        for (ci, c) in clauses.iter().enumerate() {
            for (pos, l) in c.lits().iter().enumerate() {
                if l.var >= num_vars {
                    return Err(CnfError::VarOutOfRange {
                        line: 0,
                        var: l.var as i64 + 1,
                        num_vars,
                    });
                }
                occurrences[l.var].push(Occurrence {
                    clause: ci,
                    pos: pos as u8,
                });
            }
        }
        let canonical = clauses.iter().map(Clause::canonical).collect();
        Ok(Self {
            num_vars,
            clauses,
            canonical,
            occurrences,
            name: String::new(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn canonical(&self) -> &[CanonicalClause] {
        &self.canonical
    }

    /// Clauses containing `var`, with the literal position.
    pub fn occurrences(&self, var: usize) -> &[Occurrence] {
        &self.occurrences[var]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of clauses falsified by `a`.
    pub fn evaluate(&self, a: &Assignment) -> Result<usize, CnfError> {
        self.check_len(a)?;
        Ok(self.count_unsat(a.spins()))
    }

    pub(crate) fn count_unsat(&self, spins: &[i8]) -> usize {
        self.clauses
            .iter()
            .filter(|c| !c.is_satisfied(spins))
            .count()
    }

    pub(crate) fn check_len(&self, a: &Assignment) -> Result<(), CnfError> {
        if a.len() != self.num_vars {
            return Err(CnfError::LengthMismatch {
                expected: self.num_vars,
                found: a.len(),
            });
        }
        Ok(())
    }
}

/// Counts unsatisfied clauses of `inst` under `a`.
pub fn evaluate_assignment(inst: &Instance, a: &Assignment) -> Result<usize, CnfError> {
    inst.evaluate(a)
}

/// Canonical type id (1..=4) and position permutation of a clause.
pub fn normalize_clause(c: &Clause) -> (u8, [usize; 3]) {
    let (t, p) = c.normalize();
    (t.id(), p)
}

/// Spin vector, `+1` meaning TRUE.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    spins: Vec<i8>,
}

impl Assignment {
    /// Panics if a value is not ±1.
    pub fn new(spins: Vec<i8>) -> Self {
        assert!(
            spins.iter().all(|&s| s == 1 || s == -1),
            "spins must be ±1"
        );
        Self { spins }
    }

    pub fn all_true(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Self {
            spins: values.iter().map(|&b| if b { 1 } else { -1 }).collect(),
        }
    }

    /// Rounds each phase to the nearest multiple of π: `cos φ ≥ 0` reads as TRUE.
    pub fn from_phases<T: crate::Real>(phases: &[T]) -> Self {
        Self {
            spins: phases
                .iter()
                .map(|p| if p.cos() >= T::zero() { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.spins[var] > 0
    }

    pub fn flip(&mut self, var: usize) {
        self.spins[var] = -self.spins[var];
    }

    /// Binary phases `π(1 − S)/2`.
    pub fn to_phases<T: crate::Real>(&self) -> Vec<T> {
        self.spins
            .iter()
            .map(|&s| if s > 0 { T::zero() } else { T::PI() })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clause(a: i64, b: i64, c: i64) -> Clause {
        Clause::new([a, b, c].map(|x| Literal::from_dimacs(x).unwrap())).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let inst = Instance::new(3, vec![clause(1, -2, 3)]).unwrap();
        assert_eq!(
            evaluate_assignment(&inst, &Assignment::new(vec![1, 1, 1])).unwrap(),
            0
        );
        let inst = Instance::new(3, vec![clause(1, 2, 3)]).unwrap();
        assert_eq!(
            evaluate_assignment(&inst, &Assignment::new(vec![-1, -1, -1])).unwrap(),
            1
        );
        assert_eq!(
            evaluate_assignment(&inst, &Assignment::new(vec![1, 1])),
            Err(CnfError::LengthMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_clause(&clause(1, 2, 3)), (1, [0, 1, 2]));
        assert_eq!(normalize_clause(&clause(1, -2, 3)), (2, [1, 0, 2]));
        assert_eq!(normalize_clause(&clause(-1, -2, -3)), (4, [0, 1, 2]));
        assert_eq!(normalize_clause(&clause(4, -7, -2)), (3, [1, 2, 0]));
    }

    #[test]
    fn degenerate_clauses_rejected() {
        assert!(Clause::new([Literal::pos(0), Literal::neg(0), Literal::pos(1)]).is_none());
        assert!(Clause::new([Literal::pos(0), Literal::pos(1), Literal::pos(1)]).is_none());
    }

    #[test]
    fn normalize_preserves_truth_on_all_corners() {
        for negs in 0..8u8 {
            let lits = [0, 1, 2].map(|v| Literal {
                var: v,
                negated: negs >> v & 1 == 1,
            });
            let c = Clause::new(lits).unwrap();
            let (kind, perm) = c.normalize();
            for bits in 0..8u8 {
                let spins: Vec<i8> = (0..3).map(|v| if bits >> v & 1 == 1 { 1 } else { -1 }).collect();
                let canon_spins = perm.map(|p| spins[c.lits()[p].var]);
                assert_eq!(c.is_satisfied(&spins), kind.is_satisfied(canon_spins));
            }
        }
    }

    #[test]
    fn unused_variables_allowed() {
        let inst = Instance::new(10, vec![clause(1, 2, 3)]).unwrap();
        assert!(inst.occurrences(9).is_empty());
    }

    #[test]
    fn phases_round_to_spins() {
        let a = Assignment::from_phases(&[0.1f64, 3.0, -0.2, 4.0]);
        assert_eq!(a.spins(), &[1, -1, 1, -1]);
        let back: Vec<f64> = a.to_phases();
        assert_eq!(Assignment::from_phases(&back), a);
    }
}
