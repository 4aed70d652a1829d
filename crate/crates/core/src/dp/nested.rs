use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{choose_abstraction, extensions, violated, Counters, Step, Table, Thresholds};
use crate::atoms::{Atom, AtomTable, Literal};
use crate::backends::{AspMode, Backend, ElpMode};
use crate::decomp::{build_td, make_nice, Heuristic};
use crate::graphs::{assign_compatible_sets, nested_from_primal, primal_graph};
use crate::program::{Program, Rule};
use crate::semantics::{epistemic_reduct, ratio};
use crate::wvi::Wvi;
use crate::{Count, Error, Probability, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverConfig {
    pub thresholds: Thresholds,
    pub heuristic: Heuristic,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

/// Figures collected during one solve. The width, abstraction and node
/// fields describe the outermost level and stay empty when it never builds a
/// decomposition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub primal_width: Option<usize>,
    pub nested_width: Option<usize>,
    pub abstraction_size: Option<usize>,
    pub nodes: Option<usize>,
    pub nested_calls: usize,
    pub base_cases: usize,
    pub backend_calls: usize,
}

/// World view counting by nested dynamic programming with a base solver for
/// the subproblems that are not decomposed further.
pub struct NestedSolver {
    config: SolverConfig,
    backend: Arc<dyn Backend>,
    pool: rayon::ThreadPool,
    stats: Mutex<SolveStats>,
}

type Outcome = (Count, Option<Count>);

fn zero(query: Option<&Wvi>) -> Outcome {
    (BigUint::zero(), query.map(|_| BigUint::zero()))
}

/// Adds `x :- x.` for query and interpretation atoms without an objective
/// occurrence so that every such atom gets a vertex of its own, then
/// normalizes.
fn prepare(program: &Program, w: &Wvi, query: Option<&Wvi>) -> Program {
    let objective = program.objective_atoms();
    let mut extra: BTreeSet<Atom> = w.domain().clone();
    if let Some(q) = query {
        extra.extend(q.domain().iter().copied());
    }
    let mut rules = program.rules.clone();
    rules.extend(
        extra
            .into_iter()
            .filter(|a| !objective.contains(a))
            .map(Rule::tautology),
    );
    program.with_rules(rules).normalized()
}

impl NestedSolver {
    pub fn new(config: SolverConfig, backend: Arc<dyn Backend>) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            config,
            backend,
            pool,
            stats: Mutex::new(SolveStats::default()),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Statistics of the most recent solve.
    pub fn stats(&self) -> SolveStats {
        self.stats.lock().unwrap().clone()
    }

    /// Number of world views.
    pub fn count(&self, program: &Program) -> Result<Count> {
        Ok(self.solve(program, &Wvi::new(), None)?.0)
    }

    /// Number of world views of `program ⊔ w`.
    pub fn count_extending(&self, program: &Program, w: &Wvi) -> Result<Count> {
        Ok(self.solve(program, w, None)?.0)
    }

    /// Number of world views and number of those accepting `query`.
    pub fn count_query(&self, program: &Program, query: &Wvi) -> Result<(Count, Count)> {
        let (total, accepted) = self.solve(program, &Wvi::new(), Some(query))?;
        Ok((total, accepted.unwrap_or_default()))
    }

    pub fn prob(&self, program: &Program, query: &Wvi) -> Result<Probability> {
        let (total, accepted) = self.count_query(program, query)?;
        ratio(accepted, total)
    }

    pub fn solve(&self, program: &Program, w: &Wvi, query: Option<&Wvi>) -> Result<Outcome> {
        *self.stats.lock().unwrap() = SolveStats::default();
        self.pool.install(|| self.nest(0, program, w, query))
    }

    fn note(&self, f: impl FnOnce(&mut SolveStats)) {
        f(&mut self.stats.lock().unwrap());
    }

    fn asp(&self, program: &Program, mode: AspMode<'_>) -> Result<bool> {
        self.note(|s| s.backend_calls += 1);
        self.backend.solve_asp(program, mode)
    }

    fn delegate(&self, program: &Program, w: &Wvi, query: Option<&Wvi>) -> Result<Outcome> {
        self.note(|s| s.backend_calls += 1);
        match query {
            Some(q) => {
                let (c, a) = self.backend.count_with_query(program, w, q)?;
                Ok((c, Some(a)))
            }
            None => Ok((
                self.backend
                    .solve_elp(program, ElpMode::CountWv { w, query: None })?,
                None,
            )),
        }
    }

    fn nest(
        &self,
        depth: usize,
        program: &Program,
        w: &Wvi,
        query: Option<&Wvi>,
    ) -> Result<Outcome> {
        if depth > 0 {
            self.note(|s| s.nested_calls += 1);
        }
        let program = prepare(program, w, query);
        let eats = program.epistemic_atoms();
        if eats.is_empty() {
            return self.base_case(&program, w, query);
        }
        let th = &self.config.thresholds;
        if depth >= th.depth {
            return self.delegate(&program, w, query);
        }
        let primal = primal_graph(&program);
        let width = build_td(&primal, self.config.heuristic, self.config.seed).width();
        if depth == 0 {
            self.note(|s| s.primal_width = Some(width));
        }
        if width >= th.hybrid {
            return self.delegate(&program, w, query);
        }
        let abstraction = if width >= th.abstr {
            choose_abstraction(&primal, &eats, th.abstraction_budget, self.config.seed)
        } else {
            eats
        };
        let graph = nested_from_primal(&primal, &abstraction);
        let nice = make_nice(&build_td(&graph, self.config.heuristic, self.config.seed));
        if depth == 0 {
            self.note(|s| {
                s.nested_width = Some(nice.width());
                s.abstraction_size = Some(abstraction.len());
                s.nodes = Some(nice.len());
            });
        }
        let compat = assign_compatible_sets(&primal, &abstraction, &graph, nice.td())?;

        // Every rule with a vertex outside `A^e` belongs to exactly one
        // component and is solved at its owner. The rest is checked on the
        // bag interpretations directly.
        let mut component_of: HashMap<Atom, usize> = HashMap::new();
        for (i, comp) in compat.components.iter().enumerate() {
            component_of.extend(comp.atoms.iter().map(|&a| (a, i)));
        }
        let mut node_rules: Vec<Vec<Rule>> = vec![Vec::new(); nice.len()];
        let mut checks: HashMap<Option<Atom>, Vec<&Rule>> = HashMap::new();
        for rule in &program.rules {
            let rule_eats = rule.epistemic_atoms();
            let anchor = rule
                .objective_atoms()
                .into_iter()
                .next()
                .or_else(|| rule_eats.iter().copied().find(|a| !abstraction.contains(a)));
            match anchor {
                Some(a) => node_rules[compat.owner[component_of[&a]]].push(rule.clone()),
                None if rule_eats.is_empty() => checks.entry(None).or_default().push(rule),
                None => {
                    for &a in &rule_eats {
                        checks.entry(Some(a)).or_default().push(rule);
                    }
                }
            }
        }

        let node = NodeContext {
            solver: self,
            table: program.table_arc(),
            depth,
            w,
            query,
        };
        let td = nice.td();
        let mut tables: Vec<Option<Table>> = vec![None; nice.len()];
        for t in td.post_order() {
            let mut children = td
                .children(t)
                .iter()
                .map(|&c| tables[c].take().expect("child table"));
            let rules = &node_rules[t];
            let table = match Step::of(&nice, &graph, t) {
                Step::Leaf => {
                    let empty = Wvi::new();
                    let mut candidates = Vec::new();
                    if !checks
                        .get(&None)
                        .is_some_and(|rs| rs.iter().any(|r| violated(r, &empty)))
                    {
                        candidates.push((empty, node.unit()));
                    }
                    node.expand(candidates, rules, &compat.nested_bag_atoms[t])?
                }
                Step::Introduce(a) => {
                    let child = children.next().unwrap();
                    let fixed = w.value(a);
                    let relevant = checks.get(&Some(a)).map(Vec::as_slice).unwrap_or(&[]);
                    let mut candidates = Vec::new();
                    for (i, counters) in child {
                        for j in extensions(&i, a) {
                            if fixed.is_some_and(|v| j.value(a) != Some(v)) {
                                continue;
                            }
                            if relevant.iter().any(|r| violated(r, &j)) {
                                continue;
                            }
                            candidates.push((j, counters.clone()));
                        }
                    }
                    node.expand(candidates, rules, &compat.nested_bag_atoms[t])?
                }
                Step::Remove(a) => {
                    let mut out = Table::new();
                    for (mut i, c) in children.next().unwrap() {
                        i.remove(a);
                        match out.get_mut(&i) {
                            Some(acc) => {
                                acc.count += c.count;
                                if let (Some(x), Some(y)) = (acc.query.as_mut(), c.query) {
                                    *x += y;
                                }
                            }
                            None => {
                                out.insert(i, c);
                            }
                        }
                    }
                    out
                }
                Step::Join => {
                    let left = children.next().unwrap();
                    let right = children.next().unwrap();
                    left.into_iter()
                        .filter_map(|(i, c1)| {
                            let c2 = right.get(&i)?;
                            let query = match (c1.query, &c2.query) {
                                (Some(x), Some(y)) => Some(x * y),
                                _ => None,
                            };
                            Some((
                                i,
                                Counters {
                                    count: c1.count * &c2.count,
                                    query,
                                },
                            ))
                        })
                        .collect()
                }
            };
            tables[t] = Some(table);
        }
        let root = tables[td.root()].take().unwrap_or_default();
        let mut out = zero(query);
        for c in root.into_values() {
            out.0 += c.count;
            if let (Some(x), Some(y)) = (out.1.as_mut(), c.query) {
                *x += y;
            }
        }
        Ok(out)
    }

    /// Problems without epistemic atoms have at most one world view, fixed by
    /// the answer sets.
    fn base_case(&self, program: &Program, w: &Wvi, query: Option<&Wvi>) -> Result<Outcome> {
        self.note(|s| s.base_cases += 1);
        let exists = if w.is_fully_decided() {
            self.asp(program, AspMode::Exists)? && self.asp(program, AspMode::ForbidAll(w))?
        } else {
            self.note(|s| s.backend_calls += 1);
            !self
                .backend
                .solve_elp(program, ElpMode::WvExists(w))?
                .is_zero()
        };
        if !exists {
            return Ok(zero(query));
        }
        let accepted = match query {
            None => None,
            Some(q) => {
                let positive = Wvi::from_literals(q.literals().filter(|l| l.positive));
                let mut yes =
                    positive.is_empty() || self.asp(program, AspMode::ForbidAll(&positive))?;
                for lit in q.literals().filter(|l| !l.positive) {
                    if !yes {
                        break;
                    }
                    let known = Wvi::from_literals([Literal::pos(lit.atom)]);
                    yes = !self.asp(program, AspMode::ForbidAll(&known))?;
                }
                Some(BigUint::from(u8::from(yes)))
            }
        };
        Ok((BigUint::one(), accepted))
    }
}

struct NodeContext<'a> {
    solver: &'a NestedSolver,
    table: &'a Arc<AtomTable>,
    depth: usize,
    w: &'a Wvi,
    query: Option<&'a Wvi>,
}

impl NodeContext<'_> {
    fn unit(&self) -> Counters {
        Counters {
            count: BigUint::one(),
            query: self.query.map(|_| BigUint::one()),
        }
    }

    /// Multiplies each candidate row with the nested count of the rules owned
    /// by the node, dropping rows whose count becomes zero.
    fn expand(
        &self,
        candidates: Vec<(Wvi, Counters)>,
        rules: &[Rule],
        atoms: &BTreeSet<Atom>,
    ) -> Result<Table> {
        if rules.is_empty() {
            return Ok(candidates.into_iter().collect());
        }
        let program = Program::new(Arc::clone(self.table), rules.to_vec());
        let results: Vec<Result<Option<(Wvi, Counters)>>> = candidates
            .into_par_iter()
            .map(|(j, counters)| {
                let reduct = epistemic_reduct(&program, &j);
                let w = self
                    .w
                    .union(&j)
                    .expect("rows agree with the interpretation")
                    .restrict(atoms);
                let q = self.query.map(|q| q.restrict(atoms));
                let (c, a) = self.solver.nest(self.depth + 1, &reduct, &w, q.as_ref())?;
                let count = counters.count * c;
                if count.is_zero() {
                    return Ok(None);
                }
                let query = match (counters.query, a) {
                    (Some(x), Some(y)) => Some(x * y),
                    _ => None,
                };
                Ok(Some((j, Counters { count, query })))
            })
            .collect();
        let mut table = Table::new();
        for r in results {
            if let Some((j, c)) = r? {
                table.insert(j, c);
            }
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::Internal;
    use crate::bench::gen_random_elp;
    use crate::examples::{PLAIN, RUNNING};
    use crate::parse::{parse_program, parse_query};
    use crate::semantics::{count_extending, Caps};
    use num_rational::Ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solver(abstr: usize, depth: usize) -> NestedSolver {
        let config = SolverConfig {
            thresholds: Thresholds {
                abstr,
                depth,
                ..Thresholds::default()
            },
            ..SolverConfig::default()
        };
        NestedSolver::new(config, Arc::new(Internal::default())).unwrap()
    }

    fn n(x: u32) -> Count {
        BigUint::from(x)
    }

    #[test]
    fn running_example() {
        let p = parse_program(RUNNING).unwrap();
        for s in [solver(8, 1), solver(0, 1), solver(0, 2), solver(8, 0)] {
            assert_eq!(s.count(&p).unwrap(), n(3));
            let q = parse_query(p.table(), "a,-b").unwrap();
            assert_eq!(s.count_query(&p, &q).unwrap(), (n(3), n(2)));
            assert_eq!(s.prob(&p, &q).unwrap(), Ratio::new(n(2), n(3)));
            let cd = parse_query(p.table(), "c,d").unwrap();
            assert_eq!(s.prob(&p, &cd).unwrap(), Ratio::new(n(0), n(1)));
            assert_eq!(s.prob(&p, &Wvi::new()).unwrap(), Ratio::new(n(1), n(1)));
            let a = parse_query(p.table(), "a").unwrap();
            assert_eq!(s.count_extending(&p, &a).unwrap(), n(2));
        }
    }

    #[test]
    fn plain_program_has_one_world_view() {
        let p = parse_program(PLAIN).unwrap();
        assert_eq!(solver(8, 1).count(&p).unwrap(), n(1));
    }

    #[test]
    fn base_case_by_hand() {
        let s = solver(8, 1);
        let p = parse_program("a.").unwrap();
        let a = p.table().lookup("a").unwrap();
        assert_eq!(
            s.count_extending(&p, &Wvi::from_literals([Literal::pos(a)]))
                .unwrap(),
            n(1)
        );
        assert_eq!(
            s.count_extending(&p, &Wvi::from_literals([Literal::neg(a)]))
                .unwrap(),
            n(0)
        );
        let empty = parse_program("").unwrap();
        assert_eq!(s.count(&empty).unwrap(), n(1));
        assert_eq!(s.stats().base_cases, 1);
    }

    #[test]
    fn stats_of_the_outer_level() {
        let p = parse_program(RUNNING).unwrap();
        let s = solver(8, 1);
        s.count(&p).unwrap();
        let stats = s.stats();
        assert_eq!(stats.abstraction_size, Some(4));
        assert!(stats.primal_width.is_some() && stats.nodes.is_some());
        assert!(stats.nested_calls > 0 && stats.backend_calls > 0);
    }

    #[test]
    fn random_programs_match_the_oracle() {
        let configs = [
            (0, 0),
            (0, 2),
            (usize::MAX, 0),
            (usize::MAX, 2),
            (0, 1),
            (8, 1),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..40 {
            let atoms = rng.gen_range(1..=6);
            let eats = rng.gen_range(0..=atoms.min(4));
            let p = gen_random_elp(atoms, eats, rng.gen_range(0..=8), seed).unwrap();
            let lits: Vec<Literal> = p
                .atoms()
                .into_iter()
                .filter_map(|a| match rng.gen_range(0..6) {
                    0 => Some(Literal::pos(a)),
                    1 => Some(Literal::neg(a)),
                    _ => None,
                })
                .collect();
            let q = Wvi::from_literals(lits);
            let expected = count_extending(&p, &Wvi::new(), Some(&q), Caps::default()).unwrap();
            for (abstr, depth) in configs {
                let got = solver(abstr, depth).count_query(&p, &q).unwrap();
                assert_eq!(
                    got, expected,
                    "seed {seed} abstr {abstr} depth {depth}\n{p}"
                );
            }
        }
    }
}
