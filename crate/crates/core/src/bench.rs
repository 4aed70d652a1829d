//! Instance generators and the verification harness.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{AtomTable, Literal};
use crate::cnf::{cnf_to_elp, Cnf};
use crate::dp::{count_plausible_dp, NestedSolver};
use crate::program::{BodyElement, Program, Rule};
use crate::semantics::count_elp_bruteforce;
use crate::{Count, Error, Result};

/// Scholarship variants. `Large` uses the classic gadget and only differs in
/// the intended sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scholarship {
    Classic,
    Large,
    /// `undetermined` students get a gadget with two world views; `None`
    /// draws their number from the seed.
    Many {
        undetermined: Option<usize>,
    },
}

/// Students with interview rules decided by their recorded grades. In the
/// `Many` variant, the chosen students get `high_i :- K high_i.` in place of
/// their facts, which doubles the number of world views per student.
pub fn gen_scholarship(n: usize, mode: Scholarship, seed: u64) -> Result<Program> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "at least one student is required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = vec![false; n];
    if let Scholarship::Many { undetermined } = mode {
        let u = match undetermined {
            Some(u) if u > n => {
                return Err(Error::InvalidInput(format!(
                    "{u} undetermined students among {n}"
                )));
            }
            Some(u) => u,
            None => rng.gen_range(1..=n),
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &i in &order[..u] {
            selected[i] = true;
        }
    }
    let mut table = AtomTable::new();
    let mut rules = Vec::new();
    for (i, &undetermined) in selected.iter().enumerate() {
        let s = i + 1;
        let high = table.insert(&format!("high_{s}"));
        let fair = table.insert(&format!("fair_{s}"));
        let minority = table.insert(&format!("minority_{s}"));
        let elig = table.insert(&format!("elig_{s}"));
        let interview = table.insert(&format!("interview_{s}"));
        rules.push(Rule::new(
            [elig],
            vec![BodyElement::Objective(Literal::pos(high))],
        ));
        rules.push(Rule::new(
            [elig],
            vec![
                BodyElement::Objective(Literal::pos(fair)),
                BodyElement::Objective(Literal::pos(minority)),
            ],
        ));
        rules.push(Rule::new(
            [interview],
            vec![
                BodyElement::not_known(Literal::pos(elig)),
                BodyElement::not_known(Literal::neg(elig)),
            ],
        ));
        if undetermined {
            rules.push(Rule::new(
                [high],
                vec![BodyElement::known(Literal::pos(high))],
            ));
            continue;
        }
        match rng.gen_range(0..4) {
            0 => rules.push(Rule::fact(high)),
            1 => rules.extend([Rule::fact(fair), Rule::fact(minority)]),
            2 => rules.push(Rule::new([high, fair], vec![])),
            _ => rules.push(Rule::fact(fair)),
        }
    }
    Ok(Program::new(Arc::new(table), rules))
}

/// A random program over atoms `x0..`, the first `epistemic` of which may
/// occur in epistemic literals. The result is normalized.
pub fn gen_random_elp(atoms: usize, epistemic: usize, rules: usize, seed: u64) -> Result<Program> {
    if epistemic > atoms {
        return Err(Error::InvalidInput(
            "more epistemic atoms than atoms".into(),
        ));
    }
    let mut table = AtomTable::new();
    let ids: Vec<_> = (0..atoms).map(|i| table.insert(&format!("x{i}"))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(rules);
    if atoms > 0 {
        for _ in 0..rules {
            let head: Vec<_> = (0..rng.gen_range(0..=2))
                .map(|_| ids[rng.gen_range(0..atoms)])
                .collect();
            let mut body = Vec::new();
            for _ in 0..rng.gen_range(0..=3) {
                let positive = rng.gen_bool(0.5);
                if epistemic > 0 && rng.gen_bool(0.4) {
                    let lit = Literal {
                        atom: ids[rng.gen_range(0..epistemic)],
                        positive,
                    };
                    body.push(match rng.gen_range(0..4) {
                        0 => BodyElement::known(lit),
                        1 => BodyElement::not_known(lit),
                        2 => BodyElement::possible(lit),
                        _ => BodyElement::not_possible(lit),
                    });
                } else {
                    let atom = ids[rng.gen_range(0..atoms)];
                    body.push(BodyElement::Objective(Literal { atom, positive }));
                }
            }
            out.push(Rule::new(head, body));
        }
    }
    Ok(Program::new(Arc::new(table), out).normalized())
}

/// A random formula whose clauses have `min(3, vars)` distinct variables.
pub fn gen_random_cnf(vars: usize, clauses: usize, seed: u64) -> Cnf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = vars.min(3);
    let all: Vec<i32> = (1..=vars as i32).collect();
    let clauses = (0..clauses)
        .map(|_| {
            all.choose_multiple(&mut rng, width)
                .map(|&v| if rng.gen_bool(0.5) { v } else { -v })
                .collect()
        })
        .collect();
    Cnf::new(vars, clauses)
}

/// One instance description of the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSpec {
    Scholarship {
        n: usize,
        mode: Scholarship,
        seed: u64,
    },
    Random {
        atoms: usize,
        epistemic: usize,
        rules: usize,
        seed: u64,
    },
    Cnf {
        vars: usize,
        clauses: usize,
        seed: u64,
    },
}

impl GenSpec {
    pub fn seed(&self) -> u64 {
        match *self {
            GenSpec::Scholarship { seed, .. }
            | GenSpec::Random { seed, .. }
            | GenSpec::Cnf { seed, .. } => seed,
        }
    }

    fn with_seed(mut self, s: u64) -> Self {
        match &mut self {
            GenSpec::Scholarship { seed, .. }
            | GenSpec::Random { seed, .. }
            | GenSpec::Cnf { seed, .. } => *seed = s,
        }
        self
    }

    /// The program of the instance. Formulas go through [`cnf_to_elp`].
    pub fn program(&self) -> Result<Program> {
        match *self {
            GenSpec::Scholarship { n, mode, seed } => gen_scholarship(n, mode, seed),
            GenSpec::Random {
                atoms,
                epistemic,
                rules,
                seed,
            } => gen_random_elp(atoms, epistemic, rules, seed),
            GenSpec::Cnf {
                vars,
                clauses,
                seed,
            } => cnf_to_elp(&gen_random_cnf(vars, clauses, seed)),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GenSpec::Scholarship { n, mode, seed } => match mode {
                Scholarship::Classic => write!(f, "classic n={n} seed={seed}"),
                Scholarship::Large => write!(f, "large n={n} seed={seed}"),
                Scholarship::Many {
                    undetermined: Some(u),
                } => write!(f, "many n={n} u={u} seed={seed}"),
                Scholarship::Many { undetermined: None } => write!(f, "many n={n} seed={seed}"),
            },
            GenSpec::Random {
                atoms,
                epistemic,
                rules,
                seed,
            } => write!(
                f,
                "random atoms={atoms} epistemic={epistemic} rules={rules} seed={seed}"
            ),
            GenSpec::Cnf {
                vars,
                clauses,
                seed,
            } => write!(f, "cnf vars={vars} clauses={clauses} seed={seed}"),
        }
    }
}

/// Parses a line such as `many n=3 u=2 seed=1`. A seed range `seed=1..5`
/// yields one spec per seed.
pub fn parse_spec_line(line: &str) -> Result<Vec<GenSpec>> {
    let bad = |m: String| Error::InvalidInput(format!("{m} in spec `{line}`"));
    let mut words = line.split_whitespace();
    let family = words.next().ok_or_else(|| bad("missing family".into()))?;
    let mut params = std::collections::BTreeMap::new();
    for word in words {
        let (k, v) = word
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{word}`")))?;
        params.insert(k, v);
    }
    let seeds: (u64, u64) = match params.remove("seed") {
        None => (0, 0),
        Some(v) => {
            let parse = |s: &str| s.parse::<u64>().map_err(|_| bad("invalid seed".into()));
            match v.split_once("..") {
                Some((lo, hi)) => (parse(lo)?, parse(hi)?),
                None => (parse(v)?, parse(v)?),
            }
        }
    };
    let take = |params: &mut std::collections::BTreeMap<&str, &str>, key: &str| -> Result<usize> {
        let v = params
            .remove(key)
            .ok_or_else(|| bad(format!("missing {key}")))?;
        v.parse().map_err(|_| bad(format!("invalid {key}")))
    };
    let spec = match family {
        "classic" | "large" => GenSpec::Scholarship {
            n: take(&mut params, "n")?,
            mode: if family == "classic" {
                Scholarship::Classic
            } else {
                Scholarship::Large
            },
            seed: 0,
        },
        "many" => {
            let n = take(&mut params, "n")?;
            let u = params
                .contains_key("u")
                .then(|| take(&mut params, "u"))
                .transpose()?;
            GenSpec::Scholarship {
                n,
                mode: Scholarship::Many { undetermined: u },
                seed: 0,
            }
        }
        "random" => GenSpec::Random {
            atoms: take(&mut params, "atoms")?,
            epistemic: take(&mut params, "epistemic")?,
            rules: take(&mut params, "rules")?,
            seed: 0,
        },
        "cnf" => GenSpec::Cnf {
            vars: take(&mut params, "vars")?,
            clauses: take(&mut params, "clauses")?,
            seed: 0,
        },
        other => return Err(bad(format!("unknown family `{other}`"))),
    };
    if let Some(k) = params.keys().next() {
        return Err(bad(format!("unknown parameter `{k}`")));
    }
    if seeds.0 > seeds.1 {
        return Err(bad("empty seed range".into()));
    }
    Ok((seeds.0..=seeds.1).map(|s| spec.with_seed(s)).collect())
}

/// Parses one spec per non-empty line; `#` starts a comment.
pub fn parse_specs(text: &str) -> Result<Vec<GenSpec>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            out.extend(parse_spec_line(line)?);
        }
    }
    Ok(out)
}

/// Outcome of one harness instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub spec: GenSpec,
    pub count: Count,
    pub oracle: Option<Count>,
    pub width: Option<usize>,
    pub time: Duration,
}

impl Record {
    pub fn agrees(&self) -> bool {
        self.oracle.as_ref().is_none_or(|o| *o == self.count)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.agrees()).count()
    }

    /// One tab-separated line per record, wall time only when asked for.
    pub fn render(&self, timing: bool) -> String {
        let mut out = String::new();
        for r in &self.records {
            let oracle = r.oracle.as_ref().map_or("-".to_owned(), |o| o.to_string());
            let width = r.width.map_or("-".to_owned(), |w| w.to_string());
            let verdict = match (&r.oracle, r.agrees()) {
                (None, _) => "unchecked",
                (Some(_), true) => "agree",
                (Some(_), false) => "DISAGREE",
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}",
                r.spec, r.count, oracle, verdict, width
            ));
            if timing {
                out.push_str(&format!("\t{:.3}", r.time.as_secs_f64()));
            }
            out.push('\n');
        }
        out
    }
}

/// Counts each instance with `solver` and, when `oracle` is set, compares
/// with exhaustive enumeration. Formulas are counted as plausible
/// interpretations and compared with their model count.
pub fn run_harness(specs: &[GenSpec], solver: &NestedSolver, oracle: bool) -> Result<Report> {
    let mut records = Vec::with_capacity(specs.len());
    for &spec in specs {
        let start = Instant::now();
        let (count, expected, width) = match spec {
            GenSpec::Cnf {
                vars,
                clauses,
                seed,
            } => {
                let cnf = gen_random_cnf(vars, clauses, seed);
                let count = count_plausible_dp(&cnf_to_elp(&cnf)?);
                (count, oracle.then(|| cnf.count_models_bruteforce()), None)
            }
            _ => {
                let program = spec.program()?;
                let count = solver.count(&program)?;
                let width = solver.stats().primal_width;
                let expected = if oracle {
                    Some(count_elp_bruteforce(&program, &crate::Wvi::new())?)
                } else {
                    None
                };
                (count, expected, width)
            }
        };
        records.push(Record {
            spec,
            count,
            oracle: expected,
            width,
            time: start.elapsed(),
        });
    }
    Ok(Report { records })
}

impl FromStr for GenSpec {
    type Err = Error;

    /// A single spec; seed ranges are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let mut specs = parse_spec_line(s)?;
        if specs.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "`{s}` describes more than one instance"
            )));
        }
        Ok(specs.remove(0))
    }
}
