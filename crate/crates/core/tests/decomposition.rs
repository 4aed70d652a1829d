use std::collections::BTreeSet;

use elp_core::bench::gen_random_elp;
use elp_core::decomp::{build_td, make_nice, validate_td, Heuristic};
use elp_core::graphs::{
    assign_compatible_sets, bag_atoms, bag_programs, components, epistemic_primal_graph,
    nested_from_primal, primal_graph, TaggedGraph,
};
use elp_core::Atom;
use proptest::prelude::*;

fn graph(size: usize, edges: &[(usize, usize)]) -> TaggedGraph {
    let edges: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(u, v)| (u % size, v % size))
        .filter(|(u, v)| u != v)
        .collect();
    TaggedGraph::from_edges(size, &edges)
}

fn abstraction_of(eats: &BTreeSet<Atom>, mask: u32) -> BTreeSet<Atom> {
    eats.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &a)| a)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decompositions_are_valid(
        size in 1usize..=15,
        edges in prop::collection::vec((0usize..15, 0usize..15), 0..40),
        seed in any::<u64>(),
        min_degree in any::<bool>(),
    ) {
        let g = graph(size, &edges);
        let heuristic = if min_degree { Heuristic::MinDegree } else { Heuristic::MinFill };
        let td = build_td(&g, heuristic, seed);
        prop_assert!(validate_td(&g, &td));
        prop_assert!(td.width() < size.max(1));
        prop_assert!(td.bag(td.root()).len() <= size);
        let nice = make_nice(&td);
        prop_assert!(nice.check().is_ok());
        prop_assert!(validate_td(&g, nice.td()));
        prop_assert_eq!(nice.width(), td.width());
        prop_assert!(nice.td().bag(nice.td().root()).is_empty());
        prop_assert_eq!(build_td(&g, heuristic, seed), td);
    }

    #[test]
    fn trees_have_width_one(parents in prop::collection::vec(any::<prop::sample::Index>(), 1..15), seed in any::<u64>()) {
        let edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, p)| (p.index(i + 1), i + 1)).collect();
        let g = TaggedGraph::from_edges(parents.len() + 1, &edges);
        prop_assert_eq!(build_td(&g, Heuristic::MinFill, seed).width(), 1);
        prop_assert_eq!(build_td(&g, Heuristic::MinDegree, seed).width(), 1);
    }

    #[test]
    fn graph_invariants(seed in any::<u64>(), atoms in 1usize..=10, rules in 0usize..=10, mask in any::<u32>()) {
        let p = gen_random_elp(atoms, atoms.min(5), rules, seed).unwrap();
        let primal = primal_graph(&p);
        let eats = p.epistemic_atoms();
        let a = abstraction_of(&eats, mask);
        let full = nested_from_primal(&primal, &eats);
        let epistemic = epistemic_primal_graph(&p);
        let nested = nested_from_primal(&primal, &a);
        for g in [&primal, &full, &epistemic, &nested] {
            prop_assert!(g.is_simple_and_symmetric());
        }
        let full_edges = full.atom_edges();
        for edge in epistemic.atom_edges() {
            prop_assert!(full_edges.contains(&edge));
        }

        let comps = components(&primal, &a);
        for atom in p.atoms().difference(&a) {
            prop_assert_eq!(comps.iter().filter(|c| c.atoms.contains(atom)).count(), 1);
        }

        let td = build_td(&nested, Heuristic::MinFill, seed);
        let asg = assign_compatible_sets(&primal, &a, &nested, &td).unwrap();
        let programs: Vec<Vec<usize>> = (0..td.len())
            .map(|t| bag_programs(&p, &bag_atoms(&nested, &td, t), &asg.nested_bag_atoms[t]).nested)
            .collect();
        for (i, rule) in p.rules.iter().enumerate() {
            if !rule.objective_atoms().is_empty() {
                prop_assert_eq!(programs.iter().filter(|r| r.contains(&i)).count(), 1);
            }
        }
    }
}
