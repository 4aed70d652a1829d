use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;

use super::{extensions, violated, Step};
use crate::decomp::{build_td, make_nice, Heuristic, NiceTd};
use crate::graphs::{epistemic_primal_graph, TaggedGraph};
use crate::program::{Program, Rule};
use crate::wvi::Wvi;
use crate::Count;

pub type PwvTable = BTreeMap<Wvi, Count>;

/// One step of plausible-interpretation counting. `pi_t` holds the purely
/// epistemic rules over the bag of the node.
pub fn table_pwv(step: Step, pi_t: &[&Rule], children: &[&PwvTable]) -> PwvTable {
    let plausible = |j: &Wvi| !pi_t.iter().any(|r| violated(r, j));
    let mut out = PwvTable::new();
    match step {
        Step::Leaf => {
            let empty = Wvi::new();
            if plausible(&empty) {
                out.insert(empty, BigUint::from(1u32));
            }
        }
        Step::Introduce(atom) => {
            for (i, c) in children[0] {
                for j in extensions(i, atom) {
                    if plausible(&j) {
                        out.insert(j, c.clone());
                    }
                }
            }
        }
        Step::Remove(atom) => {
            for (i, c) in children[0] {
                let mut j = i.clone();
                j.remove(atom);
                *out.entry(j).or_insert_with(BigUint::zero) += c;
            }
        }
        Step::Join => {
            for (i, c1) in children[0] {
                if let Some(c2) = children[1].get(i) {
                    out.insert(i.clone(), c1 * c2);
                }
            }
        }
    }
    out
}

/// Tables of every node of `nice`, a nice decomposition of `graph` whose
/// vertices are epistemic atoms of `program`.
pub fn pwv_tables(program: &Program, graph: &TaggedGraph, nice: &NiceTd) -> Vec<PwvTable> {
    let pure: Vec<(&Rule, BTreeSet<_>)> = program
        .rules
        .iter()
        .filter(|r| r.is_purely_epistemic())
        .map(|r| (r, r.epistemic_atoms()))
        .collect();
    let td = nice.td();
    let mut tables: Vec<PwvTable> = vec![PwvTable::new(); nice.len()];
    for t in td.post_order() {
        let bag = graph.atoms_of(td.bag(t));
        let pi_t: Vec<&Rule> = pure
            .iter()
            .filter(|(_, eats)| eats.is_subset(&bag))
            .map(|(r, _)| *r)
            .collect();
        let children: Vec<&PwvTable> = td.children(t).iter().map(|&c| &tables[c]).collect();
        tables[t] = table_pwv(Step::of(nice, graph, t), &pi_t, &children);
    }
    tables
}

/// Number of plausible interpretations over the epistemic atoms, computed on
/// a decomposition of the epistemic primal graph.
pub fn count_plausible_dp(program: &Program) -> Count {
    let graph = epistemic_primal_graph(program);
    let nice = make_nice(&build_td(&graph, Heuristic::MinFill, 0));
    let tables = pwv_tables(program, &graph, &nice);
    tables[nice.td().root()].values().sum()
}
