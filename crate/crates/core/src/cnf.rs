//! Propositional CNF formulas and the reduction to plausible-WVI counting.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::atoms::{AtomTable, Literal};
use crate::program::{BodyElement, Program, Rule};
use crate::{Count, Error, Result};

/// A formula over variables `1..=num_vars`, literals in DIMACS convention.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Self {
        Self { num_vars, clauses }
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Model count by enumerating all assignments.
    pub fn count_models_bruteforce(&self) -> Count {
        let mut count = 0u64;
        let mut assignment = vec![false; self.num_vars];
        for code in 0u64..(1u64 << self.num_vars) {
            for (i, v) in assignment.iter_mut().enumerate() {
                *v = code >> i & 1 == 1;
            }
            if self.is_satisfied_by(&assignment) {
                count += 1;
            }
        }
        BigUint::from(count)
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for l in clause {
                write!(f, "{l} ")?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Builds the program whose plausible interpretations are the models of
/// `cnf`: `:- not x, not -x.` per variable and `:- not l1, not l2, not l3.`
/// per clause. Variable `i` becomes atom `x{i}`.
pub fn cnf_to_elp(cnf: &Cnf) -> Result<Program> {
    let mut table = AtomTable::new();
    let vars: Vec<_> = (1..=cnf.num_vars)
        .map(|i| table.insert(&format!("x{i}")))
        .collect();
    let mut rules: Vec<Rule> = vars
        .iter()
        .map(|&v| {
            Rule::constraint(vec![
                BodyElement::not_known(Literal::pos(v)),
                BodyElement::not_known(Literal::neg(v)),
            ])
        })
        .collect();
    for (index, clause) in cnf.clauses.iter().enumerate() {
        if clause.len() > 3 {
            return Err(Error::ClauseTooLong {
                index,
                len: clause.len(),
            });
        }
        let mut body = Vec::with_capacity(clause.len());
        for &l in clause {
            let var = l.unsigned_abs() as usize;
            if l == 0 || var > cnf.num_vars {
                return Err(Error::InvalidInput(format!(
                    "literal {l} out of range in clause {index}"
                )));
            }
            let atom = vars[var - 1];
            let lit = if l > 0 {
                Literal::pos(atom)
            } else {
                Literal::neg(atom)
            };
            body.push(BodyElement::not_known(lit));
        }
        rules.push(Rule::constraint(body));
    }
    Ok(Program::new(Arc::new(table), rules))
}
