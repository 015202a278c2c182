//! DIMACS CNF reading and writing, restricted to 3-SAT.
//!
//! Accepted input: `c` comment lines, exactly one `p cnf <N> <M>` header
//! before any clause, then whitespace-separated nonzero integers where each
//! `0` closes a clause. A line starting with `%` ends the clause section
//! (SATlib's uniform instances carry a `%` / `0` trailer).

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use super::{Clause, CnfError, Instance, Literal};

pub fn parse_dimacs(text: &str) -> Result<Instance, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<i64> = Vec::with_capacity(3);
    let mut pending_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(malformed(line_no, "duplicate header"));
            }
            if !clauses.is_empty() || !pending.is_empty() {
                return Err(malformed(line_no, "header after clauses"));
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(malformed(line_no, "clause data before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| CnfError::InvalidToken {
                line: line_no,
                token: tok.to_string(),
            })?;
            if pending.is_empty() {
                pending_line = line_no;
            }
            if x != 0 {
                if x.unsigned_abs() as usize > num_vars {
                    return Err(CnfError::VarOutOfRange {
                        line: line_no,
                        var: x,
                        num_vars,
                    });
                }
                pending.push(x);
                continue;
            }
            clauses.push(finish_clause(&pending, pending_line)?);
            pending.clear();
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(malformed(0, "missing `p cnf` header"));
    };
    if !pending.is_empty() {
        // Unterminated trailing clause.
        return Err(CnfError::ClauseArity {
            line: pending_line,
            found: pending.len(),
        });
    }
    if clauses.len() != declared {
        return Err(CnfError::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    Instance::new(num_vars, clauses)
}

pub fn read_dimacs<R: Read>(mut reader: R) -> Result<Instance, CnfError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| CnfError::Io(e.to_string()))?;
    parse_dimacs(&text)
}

/// Reads a `.cnf` file; the instance is named after the file stem.
pub fn load_dimacs(path: impl AsRef<Path>) -> Result<Instance, CnfError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CnfError::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_dimacs(&text)?.with_name(name))
}

pub fn write_dimacs(inst: &Instance) -> String {
    let mut out = String::new();
    if !inst.name().is_empty() {
        let _ = writeln!(out, "c {}", inst.name());
    }
    let _ = writeln!(out, "p cnf {} {}", inst.num_vars(), inst.num_clauses());
    for c in inst.clauses() {
        let [a, b, d] = c.lits().map(Literal::to_dimacs);
        let _ = writeln!(out, "{a} {b} {d} 0");
    }
    out
}

fn malformed(line: usize, reason: &str) -> CnfError {
    CnfError::MalformedHeader {
        line,
        reason: reason.to_string(),
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), CnfError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(malformed(line_no, "expected `p cnf <vars> <clauses>`"));
    }
    let n: usize = parts[2]
        .parse()
        .map_err(|_| malformed(line_no, "variable count is not a non-negative integer"))?;
    let m: usize = parts[3]
        .parse()
        .map_err(|_| malformed(line_no, "clause count is not a non-negative integer"))?;
    if n == 0 {
        return Err(malformed(line_no, "variable count must be at least 1"));
    }
    Ok((n, m))
}

fn finish_clause(lits: &[i64], line: usize) -> Result<Clause, CnfError> {
    if lits.len() != 3 {
        return Err(CnfError::ClauseArity {
            line,
            found: lits.len(),
        });
    }
    let lits = [lits[0], lits[1], lits[2]].map(|x| Literal::from_dimacs(x).unwrap());
    Clause::new(lits).ok_or_else(|| {
        let var = if lits[0].var == lits[1].var || lits[0].var == lits[2].var {
            lits[0].var
        } else {
            lits[1].var
        };
        CnfError::DuplicateVarInClause { line, var: var + 1 }
    })
}
