use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::Atom;
use crate::graphs::{nested_from_primal, TaggedGraph};

/// Value to minimize: edges of the nested primal graph, then the negated size
/// of the abstraction.
pub fn abstraction_objective(primal: &TaggedGraph, abstraction: &BTreeSet<Atom>) -> (usize, isize) {
    let edges = nested_from_primal(primal, abstraction).edge_count();
    (edges, -(abstraction.len() as isize))
}

/// Picks a nonempty subset of `eats` with a sparse nested primal graph:
/// greedy removal from the full set, then `budget` toggle moves of a seeded
/// local search that accepts non-worsening moves.
pub fn choose_abstraction(
    primal: &TaggedGraph,
    eats: &BTreeSet<Atom>,
    budget: usize,
    seed: u64,
) -> BTreeSet<Atom> {
    if eats.len() <= 1 {
        return eats.clone();
    }
    let mut current = eats.clone();
    let mut score = abstraction_objective(primal, &current);
    loop {
        let mut best: Option<(BTreeSet<Atom>, (usize, isize))> = None;
        if current.len() > 1 {
            for &a in &current {
                let mut candidate = current.clone();
                candidate.remove(&a);
                let s = abstraction_objective(primal, &candidate);
                if best.as_ref().is_none_or(|(_, b)| s < *b) {
                    best = Some((candidate, s));
                }
            }
        }
        match best {
            Some((candidate, s)) if s < score => {
                current = candidate;
                score = s;
            }
            _ => break,
        }
    }

    let pool: Vec<Atom> = eats.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut best, mut best_score) = (current.clone(), score);
    for _ in 0..budget {
        let a = pool[rng.gen_range(0..pool.len())];
        let mut candidate = current.clone();
        if !candidate.remove(&a) {
            candidate.insert(a);
        }
        if candidate.is_empty() {
            continue;
        }
        let s = abstraction_objective(primal, &candidate);
        if s <= score {
            current = candidate;
            score = s;
            if s < best_score {
                best = current.clone();
                best_score = s;
            }
        }
    }
    best
}
