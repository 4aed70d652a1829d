use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use elp_core::backends::Internal;
use elp_core::bench::{gen_random_cnf, gen_random_elp, gen_scholarship, Scholarship};
use elp_core::cnf::cnf_to_elp;
use elp_core::decomp::{
    build_td, make_nice, validate_td, Heuristic, NiceTd, NodeKind, TreeDecomposition,
};
use elp_core::dp::{
    count_plausible_dp, pwv_tables, NestedSolver, PwvTable, SolverConfig, Thresholds,
};
use elp_core::examples::{PLAIN, RUNNING};
use elp_core::graphs::{
    assign_compatible_sets, bag_atoms, bag_programs, epistemic_primal_graph, nested_primal_graph,
    primal_graph, TaggedGraph, Vertex,
};
use elp_core::semantics::{self, Caps};
use elp_core::{parse_program, parse_query, Atom, Count, Probability, Program, Wvi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ANSWER_SET_LIMIT: Duration = Duration::from_secs(1);
const CNF_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_LIMIT: Duration = Duration::from_secs(300);
const SCALE_LIMIT: Duration = Duration::from_secs(120);

const RUNNING_FILE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/running.elp");

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(ok: bool, message: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.into())
    }
}

fn elpc(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_elpc"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn atoms(p: &Program, names: &[&str]) -> BTreeSet<Atom> {
    names.iter().map(|n| p.table().lookup(n).unwrap()).collect()
}

fn n(x: u64) -> Count {
    Count::from(x)
}

fn solver(thresholds: Thresholds) -> NestedSolver {
    let config = SolverConfig {
        thresholds,
        ..SolverConfig::default()
    };
    NestedSolver::new(config, Arc::new(Internal::new(thresholds.caps))).unwrap()
}

fn answer_sets_of_plain() -> Outcome {
    let p = parse_program(PLAIN).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sets = semantics::answer_sets(&p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let got: BTreeSet<BTreeSet<String>> = sets
        .iter()
        .map(|s| s.iter().map(|&a| p.table().name(a).to_owned()).collect())
        .collect();
    let expected: BTreeSet<BTreeSet<String>> = [["a", "c"], ["a", "d"], ["b", "c"], ["b", "d"]]
        .iter()
        .map(|s| s.iter().map(|x| x.to_string()).collect())
        .collect();
    ensure(
        sets.len() == 4 && got == expected,
        format!("answer sets {got:?}"),
    )?;
    ensure(elapsed < ANSWER_SET_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("4 answer sets in {elapsed:?}"))
}

fn running_example_cli() -> Outcome {
    let (code, out) = elpc(&["count", RUNNING_FILE]);
    ensure(
        code == 0 && out == b"3\n",
        format!("count printed {:?}", String::from_utf8_lossy(&out)),
    )?;
    let (code, out) = elpc(&["wvs", RUNNING_FILE]);
    let got: BTreeSet<String> = String::from_utf8_lossy(&out)
        .lines()
        .map(str::to_owned)
        .collect();
    let expected: BTreeSet<String> = ["{a, -b, -c, d}", "{a, -b, c, -d}", "{-a, b, c, -d}"]
        .map(str::to_owned)
        .into();
    ensure(code == 0 && got == expected, format!("wvs printed {got:?}"))?;
    Ok("count 3, world views I1 I2 I3".into())
}

/// Nice decomposition of the epistemic primal graph following the
/// elimination order a, b, d, c of the running example.
fn running_nice_td(p: &Program, graph: &TaggedGraph) -> NiceTd {
    let v = |name: &str| {
        graph
            .index_of(Vertex::e(p.table().lookup(name).unwrap()))
            .unwrap()
    };
    let bag = |names: &[&str]| names.iter().map(|x| v(x)).collect::<BTreeSet<_>>();
    NiceTd::from_nodes(vec![
        (NodeKind::Leaf, bag(&[]), Some(1)),
        (NodeKind::Introduce(v("b")), bag(&["b"]), Some(2)),
        (NodeKind::Introduce(v("a")), bag(&["a", "b"]), Some(3)),
        (NodeKind::Introduce(v("c")), bag(&["a", "b", "c"]), Some(4)),
        (NodeKind::Remove(v("a")), bag(&["b", "c"]), Some(5)),
        (NodeKind::Remove(v("b")), bag(&["c"]), Some(10)),
        (NodeKind::Leaf, bag(&[]), Some(7)),
        (NodeKind::Introduce(v("d")), bag(&["d"]), Some(8)),
        (NodeKind::Introduce(v("c")), bag(&["c", "d"]), Some(9)),
        (NodeKind::Remove(v("d")), bag(&["c"]), Some(10)),
        (NodeKind::Join, bag(&["c"]), Some(11)),
        (NodeKind::Remove(v("c")), bag(&[]), None),
    ])
    .unwrap()
}

fn c_table(c: Atom, undecided: u64, positive: u64, negative: u64) -> PwvTable {
    let row = |value: Option<bool>| {
        let mut w = Wvi::new();
        w.set(c, value);
        w
    };
    PwvTable::from([
        (row(None), n(undecided)),
        (row(Some(true)), n(positive)),
        (row(Some(false)), n(negative)),
    ])
}

fn render_c_table(t: &PwvTable) -> String {
    let rows: Vec<String> = t
        .iter()
        .map(|(w, k)| {
            let key = match w.literals().next() {
                Some(l) if l.positive => "{c}",
                Some(_) => "{-c}",
                None => "{}",
            };
            format!("<{key},{k}>")
        })
        .collect();
    rows.join(" ")
}

fn plausible_tables() -> Outcome {
    let p = parse_program(RUNNING).map_err(|e| e.to_string())?;
    let graph = epistemic_primal_graph(&p);
    let nice = running_nice_td(&p, &graph);
    let tables = pwv_tables(&p, &graph, &nice);
    let c = p.table().lookup("c").unwrap();
    let root: Count = tables[nice.td().root()].values().sum();
    let dp = count_plausible_dp(&p);
    let tau6_expected = c_table(c, 4, 3, 2);
    let tau10_expected = c_table(c, 3, 2, 3);
    let mut problems = Vec::new();
    if dp != n(24) || root != n(24) {
        problems.push(format!("plausible count {dp} on the heuristic decomposition and {root} on the fixed one, expected 24"));
    }
    if tables[5] != tau6_expected {
        problems.push(format!(
            "tau6 = {}, expected {}",
            render_c_table(&tables[5]),
            render_c_table(&tau6_expected)
        ));
    }
    if tables[9] != tau10_expected {
        problems.push(format!(
            "tau10 = {}, expected {}",
            render_c_table(&tables[9]),
            render_c_table(&tau10_expected)
        ));
    }
    if problems.is_empty() {
        Ok("24 plausible, tau6 and tau10 match".into())
    } else {
        Err(problems.join("; "))
    }
}

fn running_query() -> Outcome {
    let p = parse_program(RUNNING).map_err(|e| e.to_string())?;
    let q = parse_query(p.table(), "a,-b").map_err(|e| e.to_string())?;
    let s = solver(Thresholds::default());
    let (total, accepted) = s.count_query(&p, &q).map_err(|e| e.to_string())?;
    let prob = s.prob(&p, &q).map_err(|e| e.to_string())?;
    let two_thirds = Probability::new(n(2), n(3));
    ensure(
        total == n(3) && accepted == n(2) && prob == two_thirds,
        format!("dp gave {accepted}/{total}"),
    )?;
    let oracle = semantics::count_elp_bruteforce(&p, &q).map_err(|e| e.to_string())?;
    let oracle_prob = semantics::prob_bruteforce(&p, &q).map_err(|e| e.to_string())?;
    ensure(
        oracle == n(2) && oracle_prob == two_thirds,
        format!("oracle gave {oracle}, {oracle_prob}"),
    )?;
    Ok("count 2 and probability 2/3 by both".into())
}

fn nested_graph_and_bag_programs() -> Outcome {
    let p = parse_program(RUNNING).map_err(|e| e.to_string())?;
    let a = atoms(&p, &["b", "c", "d"]);
    let nested = nested_primal_graph(&p, &a).map_err(|e| e.to_string())?;
    let expected = vec![
        (
            p.table().lookup("b").unwrap(),
            p.table().lookup("c").unwrap(),
        ),
        (
            p.table().lookup("c").unwrap(),
            p.table().lookup("d").unwrap(),
        ),
    ];
    ensure(
        nested.atom_edges() == expected,
        format!("edges {:?}", nested.atom_edges()),
    )?;

    let v = |name: &str| {
        nested
            .index_of(Vertex::e(p.table().lookup(name).unwrap()))
            .unwrap()
    };
    let td = TreeDecomposition::from_parents(
        vec![
            [v("b"), v("c")].into(),
            [v("c"), v("d")].into(),
            [v("c")].into(),
        ],
        vec![Some(2), Some(2), None],
    )
    .map_err(|e| e.to_string())?;
    ensure(validate_td(&nested, &td), "decomposition invalid")?;
    let asg =
        assign_compatible_sets(&primal_graph(&p), &a, &nested, &td).map_err(|e| e.to_string())?;
    ensure(
        asg.nested_bag_atoms
            == vec![
                atoms(&p, &["a", "b"]),
                atoms(&p, &["c", "d"]),
                BTreeSet::new(),
            ],
        "compatible sets are not owned by t1 and t2",
    )?;
    let programs: Vec<Vec<usize>> = (0..3)
        .map(|t| bag_programs(&p, &bag_atoms(&nested, &td, t), &asg.nested_bag_atoms[t]).nested)
        .collect();
    let expected: Vec<Vec<usize>> = vec![vec![1, 4, 5, 8, 9, 10, 11], vec![2, 3, 6, 7, 12], vec![]];
    let got: Vec<Vec<usize>> = programs
        .iter()
        .map(|r| r.iter().map(|i| i + 1).collect())
        .collect();
    ensure(got == expected, format!("nested bag programs {got:?}"))?;
    Ok("edges b-c, c-d; bag programs partition r1..r12".into())
}

fn cnf_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    for i in 0..50 {
        let f = gen_random_cnf(rng.gen_range(1..=12), rng.gen_range(1..=20), rng.gen());
        let p = cnf_to_elp(&f).map_err(|e| e.to_string())?;
        let (dp, models) = (count_plausible_dp(&p), f.count_models_bruteforce());
        ensure(
            dp == models,
            format!("formula {i}: {dp} plausible, {models} models"),
        )?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < CNF_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("50 formulas in {elapsed:?}"))
}

fn random_query(p: &Program, rng: &mut ChaCha8Rng) -> Wvi {
    let all: Vec<Atom> = p.table().atoms().collect();
    let mut q = Wvi::new();
    for _ in 0..rng.gen_range(1..=2) {
        let atom = all[rng.gen_range(0..all.len())];
        if q.value(atom).is_none() {
            q.decide(atom, rng.gen_bool(0.5));
        }
    }
    q
}

fn oracle_equivalence() -> Outcome {
    let mut configs = Vec::new();
    for abstr in [0, usize::MAX] {
        for depth in [0, 2] {
            configs.push(Thresholds {
                hybrid: usize::MAX,
                abstr,
                depth,
                ..Thresholds::default()
            });
        }
    }
    let solvers: Vec<NestedSolver> = configs.iter().map(|&t| solver(t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    for i in 0..200 {
        let n_atoms = rng.gen_range(1..=8);
        let p = gen_random_elp(
            n_atoms,
            rng.gen_range(1..=n_atoms.min(5)),
            rng.gen_range(1..=10),
            rng.gen(),
        )
        .map_err(|e| e.to_string())?;
        let q = random_query(&p, &mut rng);
        let (total, accepted) =
            semantics::count_extending(&p, &Wvi::new(), Some(&q), Caps::default())
                .map_err(|e| e.to_string())?;
        let expected_prob = semantics::ratio(accepted.clone(), total.clone()).ok();
        for (k, s) in solvers.iter().enumerate() {
            let count = s.count(&p).map_err(|e| e.to_string())?;
            let prob = s.prob(&p, &q).ok();
            ensure(
                count == total && prob == expected_prob,
                format!("program {i}, config {k}: count {count} vs {total}, prob {prob:?} vs {expected_prob:?}"),
            )?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("200 programs, 4 configurations, {elapsed:?}"))
}

fn random_graph(rng: &mut ChaCha8Rng) -> TaggedGraph {
    let size = rng.gen_range(1..=15);
    let density = rng.gen_range(0.05..0.6);
    let mut edges = Vec::new();
    for u in 0..size {
        for v in u + 1..size {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    TaggedGraph::from_edges(size, &edges)
}

fn td_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let g = random_graph(&mut rng);
        for heuristic in [Heuristic::MinFill, Heuristic::MinDegree] {
            let td = build_td(&g, heuristic, rng.gen());
            ensure(
                validate_td(&g, &td),
                format!("graph {i}: invalid decomposition"),
            )?;
            let nice = make_nice(&td);
            ensure(nice.check().is_ok(), format!("graph {i}: not nice"))?;
            ensure(
                validate_td(&g, nice.td()),
                format!("graph {i}: nice decomposition invalid"),
            )?;
            ensure(
                nice.width() == td.width(),
                format!("graph {i}: width changed"),
            )?;
        }
    }
    for i in 0..30 {
        let size = rng.gen_range(2..=15);
        let edges: Vec<(usize, usize)> = (1..size).map(|v| (rng.gen_range(0..v), v)).collect();
        let td = build_td(
            &TaggedGraph::from_edges(size, &edges),
            Heuristic::MinFill,
            i,
        );
        ensure(td.width() == 1, format!("tree {i}: width {}", td.width()))?;
    }
    let p = parse_program(RUNNING).map_err(|e| e.to_string())?;
    let width = build_td(&epistemic_primal_graph(&p), Heuristic::MinFill, 0).width();
    ensure(width == 2, format!("epistemic primal graph width {width}"))?;
    Ok("100 graphs valid, trees width 1, running example width 2".into())
}

fn oracle_count(p: &Program) -> Result<Count, String> {
    Ok(n(semantics::world_views_bruteforce(p)
        .map_err(|e| e.to_string())?
        .len() as u64))
}

fn generator_laws() -> Outcome {
    let s = solver(Thresholds::default());
    for size in 1..=6 {
        for mode in [Scholarship::Classic, Scholarship::Large] {
            for seed in 0..3 {
                let p = gen_scholarship(size, mode, seed).map_err(|e| e.to_string())?;
                let (dp, oracle) = (s.count(&p).map_err(|e| e.to_string())?, oracle_count(&p)?);
                ensure(
                    dp == n(1) && oracle == n(1),
                    format!("{mode:?} n={size} seed={seed}: {dp} / {oracle}"),
                )?;
            }
        }
    }
    for u in 1..=4 {
        for size in [u, 4] {
            let p = gen_scholarship(
                size,
                Scholarship::Many {
                    undetermined: Some(u),
                },
                u as u64,
            )
            .map_err(|e| e.to_string())?;
            let expected = n(1 << u);
            let (dp, oracle) = (s.count(&p).map_err(|e| e.to_string())?, oracle_count(&p)?);
            ensure(
                dp == expected && oracle == expected,
                format!("many n={size} u={u}: {dp} / {oracle}"),
            )?;
        }
    }
    let p = gen_scholarship(500, Scholarship::Classic, 0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let count = s.count(&p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(count == n(1), format!("classic n=500 counted {count}"))?;
    ensure(
        elapsed < SCALE_LIMIT,
        format!("classic n=500 took {elapsed:?}"),
    )?;
    Ok(format!("laws hold, classic n=500 in {elapsed:?}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let specs = dir.path().join("specs.txt");
    std::fs::write(&specs, "classic n=3 seed=1..3\nmany n=3 u=2 seed=4\nrandom atoms=6 epistemic=3 rules=8 seed=5\ncnf vars=6 clauses=9 seed=2\n")
        .map_err(|e| e.to_string())?;
    let specs = specs.to_str().unwrap();
    let generated = dir.path().join("many.elp");
    let (code, out) = elpc(&["gen", "many", "n=5", "u=3", "seed=11"]);
    ensure(code == 0, "gen failed")?;
    std::fs::write(&generated, out).map_err(|e| e.to_string())?;
    let many = generated.to_str().unwrap();

    let mut runs: Vec<Vec<&str>> = Vec::new();
    for file in [RUNNING_FILE, many] {
        runs.push(vec!["count", file]);
        runs.push(vec!["--format", "structured", "count", file]);
        runs.push(vec!["--threshold-abstr", "0", "--seed", "3", "count", file]);
        runs.push(vec!["wvs", file]);
        runs.push(vec!["oracle", file]);
        for kind in ["primal", "epistemic", "nested"] {
            runs.push(vec!["graph", file, "--kind", kind]);
            runs.push(vec!["--seed", "9", "td", file, "--graph", kind]);
            runs.push(vec![
                "--seed",
                "9",
                "--heuristic",
                "min-degree",
                "td",
                file,
                "--graph",
                kind,
                "--dot",
            ]);
        }
    }
    runs.push(vec!["count", RUNNING_FILE, "--query", "a,-b"]);
    runs.push(vec!["prob", RUNNING_FILE, "--query", "a,-b"]);
    runs.push(vec![
        "--format",
        "structured",
        "prob",
        RUNNING_FILE,
        "--query",
        "c",
    ]);
    runs.push(vec!["oracle", RUNNING_FILE, "--query=-a"]);
    runs.push(vec![
        "graph",
        RUNNING_FILE,
        "--kind",
        "nested",
        "--abstraction",
        "b,c,d",
    ]);
    runs.push(vec!["gen", "classic", "n=20", "seed=4"]);
    runs.push(vec!["gen", "large", "n=20", "seed=4"]);
    runs.push(vec![
        "gen",
        "random",
        "atoms=8",
        "epistemic=4",
        "rules=12",
        "seed=4",
    ]);
    runs.push(vec![
        "gen",
        "cnf",
        "vars=10",
        "clauses=30",
        "seed=4",
        "--dimacs",
    ]);
    runs.push(vec!["harness", specs, "--summary"]);
    runs.push(vec!["--format", "structured", "harness", specs]);

    for args in &runs {
        let first = elpc(args);
        let second = elpc(args);
        ensure(
            first.0 == 0,
            format!("`elpc {}` exited with {}", args.join(" "), first.0),
        )?;
        ensure(
            first == second,
            format!("`elpc {}` differs between runs", args.join(" ")),
        )?;
    }
    for file in [RUNNING_FILE, many] {
        let one = elpc(&["--jobs", "1", "--format", "structured", "count", file]);
        let four = elpc(&["--jobs", "4", "--format", "structured", "count", file]);
        ensure(
            one == four,
            format!("thread count changes the output for {file}"),
        )?;
    }
    Ok(format!(
        "{} invocations reproduced byte for byte",
        runs.len()
    ))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("answer sets of the plain program", answer_sets_of_plain),
        ("count and wvs on the running example", running_example_cli),
        (
            "plausible count and tables on a fixed decomposition",
            plausible_tables,
        ),
        ("query count and probability", running_query),
        (
            "nested primal graph and nested bag programs",
            nested_graph_and_bag_programs,
        ),
        ("CNF reduction", cnf_reduction),
        (
            "agreement with enumeration on random programs",
            oracle_equivalence,
        ),
        ("tree decompositions", td_suite),
        ("generator laws and scale", generator_laws),
        ("determinism", determinism),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
