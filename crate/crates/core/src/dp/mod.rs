//! Dynamic programming over nice tree decompositions: counting plausible
//! interpretations, and counting world views by nested dynamic programming.

mod abstraction;
mod nested;
mod pwv;

use std::collections::BTreeMap;

pub use abstraction::{abstraction_objective, choose_abstraction};
pub use nested::{NestedSolver, SolveStats, SolverConfig};
pub use pwv::{count_plausible_dp, pwv_tables, table_pwv, PwvTable};

use crate::atoms::Atom;
use crate::decomp::{NiceTd, NodeKind};
use crate::graphs::TaggedGraph;
use crate::program::Rule;
use crate::semantics::{reduce_rule, Caps};
use crate::wvi::Wvi;
use crate::Count;

/// Routing parameters of the nested solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    /// Primal width from which the whole problem goes to the backend.
    pub hybrid: usize,
    /// Primal width from which an abstraction smaller than all epistemic
    /// atoms is chosen.
    pub abstr: usize,
    /// Nesting depth from which problems go to the backend.
    pub depth: usize,
    /// Local search moves spent on choosing an abstraction.
    pub abstraction_budget: usize,
    pub caps: Caps,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            hybrid: 45,
            abstr: 8,
            depth: 1,
            abstraction_budget: 200,
            caps: Caps::default(),
        }
    }
}

/// A nice decomposition node with its vertex translated to an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Leaf,
    Introduce(Atom),
    Remove(Atom),
    Join,
}

impl Step {
    pub fn of(nice: &NiceTd, graph: &TaggedGraph, t: usize) -> Step {
        match nice.kind(t) {
            NodeKind::Leaf => Step::Leaf,
            NodeKind::Introduce(v) => Step::Introduce(graph.vertex(v).atom),
            NodeKind::Remove(v) => Step::Remove(graph.vertex(v).atom),
            NodeKind::Join => Step::Join,
        }
    }
}

/// Counters of one row of a world view table. `query` is present when a
/// query is being evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counters {
    pub count: Count,
    pub query: Option<Count>,
}

/// Table of the world view counting algorithms, keyed by the interpretation
/// of the bag.
pub type Table = BTreeMap<Wvi, Counters>;

/// Whether a purely epistemic rule whose atoms are all decided or undecided
/// in `j` reduces to a violated constraint.
pub(crate) fn violated(rule: &Rule, j: &Wvi) -> bool {
    rule.body.iter().all(|e| j.value(e.atom()).is_some()) && reduce_rule(rule, j).is_some()
}

/// The three extensions of `i` by `atom`, undecided first.
pub(crate) fn extensions(i: &Wvi, atom: Atom) -> [Wvi; 3] {
    [None, Some(true), Some(false)].map(|value| {
        let mut j = i.clone();
        j.set(atom, value);
        j
    })
}
