use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;

use elp_core::backends::{Backend, External, ExternalConfig, Internal, ParseMode};
use elp_core::bench::{self, GenSpec};
use elp_core::decomp::{build_td, make_nice, Heuristic};
use elp_core::dp::{NestedSolver, SolveStats, SolverConfig, Thresholds};
use elp_core::graphs::{epistemic_primal_graph, nested_primal_graph, primal_graph, TaggedGraph};
use elp_core::semantics::{self, Caps};
use elp_core::{parse_program, parse_query, Error, Probability, Program, Wvi};

/// World view counting for ground epistemic logic programs.
#[derive(Parser)]
#[command(name = "elpc", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Primal width from which whole problems go to the backend
    #[arg(long, global = true, default_value_t = 45)]
    threshold_hybrid: usize,
    /// Primal width from which an abstraction is searched for
    #[arg(long, global = true, default_value_t = 8)]
    threshold_abstr: usize,
    /// Nesting depth from which problems go to the backend
    #[arg(long, global = true, default_value_t = 1)]
    max_depth: usize,
    /// Local search moves when choosing an abstraction
    #[arg(long, global = true, default_value_t = 200)]
    abstraction_budget: usize,
    #[arg(long, global = true, default_value = "min-fill", value_parser = parse_heuristic)]
    heuristic: Heuristic,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Internal)]
    backend: BackendKind,
    /// Command line of the external solver, with `{file}` for the program
    #[arg(long, global = true)]
    external_cmd: Option<String>,
    /// How external output is read
    #[arg(long, global = true, value_enum, default_value_t = ExternalMode::Count)]
    external_mode: ExternalMode,
    /// Output line meaning "yes" in sat mode
    #[arg(long, global = true, default_value = "SAT")]
    sat_marker: String,
    /// External solver timeout in seconds
    #[arg(long, global = true, default_value_t = 60.0)]
    timeout: f64,
    /// Atom cap of answer set enumeration
    #[arg(long, global = true, default_value_t = 24)]
    cap_atoms: usize,
    /// Epistemic atom cap of world view enumeration
    #[arg(long, global = true, default_value_t = 12)]
    cap_epistemic: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Report wall time
    #[arg(long, global = true)]
    timing: bool,
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    s.parse()
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Internal,
    External,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExternalMode {
    Count,
    Sat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphKind {
    Primal,
    Epistemic,
    Nested,
}

#[derive(Subcommand)]
enum Command {
    /// Count world views accepting the query
    Count {
        file: PathBuf,
        #[arg(long)]
        query: Option<String>,
    },
    /// Probability that a world view accepts the query
    Prob {
        file: PathBuf,
        #[arg(long)]
        query: String,
        /// Digits of the decimal rendering
        #[arg(long, default_value_t = 6)]
        digits: usize,
    },
    /// List world views by enumeration
    Wvs { file: PathBuf },
    /// Count world views by enumeration
    Oracle {
        file: PathBuf,
        #[arg(long)]
        query: Option<String>,
    },
    /// Print a graph of the program in DOT
    Graph {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphKind::Primal)]
        kind: GraphKind,
        /// Atoms of the abstraction, all epistemic atoms by default
        #[arg(long)]
        abstraction: Option<String>,
    },
    /// Decompose a graph of the program and print statistics
    Td {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphKind::Primal)]
        graph: GraphKind,
        #[arg(long)]
        abstraction: Option<String>,
        /// Print the nice decomposition in DOT instead
        #[arg(long)]
        dot: bool,
    },
    /// Generate an instance, e.g. `gen many n=3 u=2 seed=1`
    Gen {
        #[arg(required = true, num_args = 1..)]
        spec: Vec<String>,
        /// Print formulas in DIMACS instead of their program
        #[arg(long)]
        dimacs: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run instances from a spec file and compare with enumeration
    Harness {
        specs: PathBuf,
        #[arg(long)]
        no_oracle: bool,
        /// Append a summary line
        #[arg(long)]
        summary: bool,
    },
}

enum Failure {
    Usage(String),
    Engine(Error),
    Io(String),
    Disagreement(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &PathBuf) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }
}

fn load(path: &PathBuf) -> CliResult<Program> {
    Ok(parse_program(&read_input(path)?)?)
}

fn query_of(program: &Program, text: Option<&str>) -> CliResult<Wvi> {
    Ok(parse_query(program.table(), text.unwrap_or(""))?)
}

fn abstraction_of(program: &Program, text: Option<&str>) -> CliResult<BTreeSet<elp_core::Atom>> {
    match text {
        None => Ok(program.epistemic_atoms()),
        Some(text) => Ok(parse_query(program.table(), text)?.domain().clone()),
    }
}

impl Options {
    fn caps(&self) -> Caps {
        Caps {
            atoms: self.cap_atoms,
            epistemic: self.cap_epistemic,
        }
    }

    fn backend(&self) -> CliResult<Arc<dyn Backend>> {
        match self.backend {
            BackendKind::Internal => Ok(Arc::new(Internal::new(self.caps()))),
            BackendKind::External => {
                let template = self.external_cmd.as_deref().ok_or_else(|| {
                    Failure::Usage("--backend external needs --external-cmd".into())
                })?;
                let parse = match self.external_mode {
                    ExternalMode::Count => ParseMode::Count,
                    ExternalMode::Sat => ParseMode::Sat {
                        marker: self.sat_marker.clone(),
                    },
                };
                if !(self.timeout > 0.0 && self.timeout.is_finite()) {
                    return Err(Failure::Usage("--timeout must be positive".into()));
                }
                let config = ExternalConfig::from_template(
                    template,
                    parse,
                    Duration::from_secs_f64(self.timeout),
                )
                .map_err(|e| Failure::Usage(e.to_string()))?;
                Ok(Arc::new(External::new(config)))
            }
        }
    }

    fn solver(&self) -> CliResult<NestedSolver> {
        if self.threshold_hybrid < self.threshold_abstr {
            return Err(Failure::Usage(
                "--threshold-hybrid must be at least --threshold-abstr".into(),
            ));
        }
        let config = SolverConfig {
            thresholds: Thresholds {
                hybrid: self.threshold_hybrid,
                abstr: self.threshold_abstr,
                depth: self.max_depth,
                abstraction_budget: self.abstraction_budget,
                caps: self.caps(),
            },
            heuristic: self.heuristic,
            seed: self.seed,
            jobs: self.jobs,
        };
        Ok(NestedSolver::new(config, self.backend()?)?)
    }
}

#[derive(Serialize)]
struct Fraction {
    num: String,
    den: String,
}

#[derive(Serialize)]
struct Widths {
    primal: Option<usize>,
    nested: Option<usize>,
}

#[derive(Serialize)]
struct SolveRecord {
    count: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<Fraction>,
    width: Widths,
    abstraction_size: Option<usize>,
    node_count: Option<usize>,
    backend_calls: usize,
    nested_calls: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<f64>,
}

impl SolveRecord {
    fn new(
        count: &BigUint,
        probability: Option<&Probability>,
        stats: &SolveStats,
        time: Option<Duration>,
    ) -> Self {
        Self {
            count: count.to_string(),
            probability: probability.map(|p| Fraction {
                num: p.numer().to_string(),
                den: p.denom().to_string(),
            }),
            width: Widths {
                primal: stats.primal_width,
                nested: stats.nested_width,
            },
            abstraction_size: stats.abstraction_size,
            node_count: stats.nodes,
            backend_calls: stats.backend_calls,
            nested_calls: stats.nested_calls,
            wall_time_ms: time.map(|t| t.as_secs_f64() * 1000.0),
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable record")
}

/// Rounds half up to `digits` decimals.
fn decimal(p: &Probability, digits: usize) -> String {
    let scale = BigUint::from(10u32).pow(digits as u32);
    let two = BigUint::from(2u32);
    let scaled = (p.numer() * &scale * &two + p.denom()) / (p.denom() * &two);
    let whole = &scaled / &scale;
    if digits == 0 {
        return whole.to_string();
    }
    let frac = (&scaled % &scale).to_string();
    format!("{whole}.{}{frac}", "0".repeat(digits - frac.len()))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn graph_of(
    program: &Program,
    kind: GraphKind,
    abstraction: Option<&str>,
) -> CliResult<TaggedGraph> {
    Ok(match kind {
        GraphKind::Primal => primal_graph(program),
        GraphKind::Epistemic => epistemic_primal_graph(program),
        GraphKind::Nested => nested_primal_graph(program, &abstraction_of(program, abstraction)?)?,
    })
}

fn run(cli: Cli) -> CliResult<String> {
    let opts = &cli.opts;
    let structured = opts.format == Format::Structured;
    match &cli.command {
        Command::Count { file, query } => {
            let program = load(file)?;
            let solver = opts.solver()?;
            let (result, time) = match query {
                None => timed(|| solver.count(&program)),
                Some(q) => {
                    let q = query_of(&program, Some(q))?;
                    timed(|| {
                        solver
                            .count_query(&program, &q)
                            .map(|(_, accepted)| accepted)
                    })
                }
            };
            let count = result?;
            let time = opts.timing.then_some(time);
            if structured {
                return Ok(json(&SolveRecord::new(&count, None, &solver.stats(), time)));
            }
            let mut out = count.to_string();
            if let Some(t) = time {
                out.push_str(&format!("\ntime\t{:.3}s", t.as_secs_f64()));
            }
            Ok(out)
        }
        Command::Prob {
            file,
            query,
            digits,
        } => {
            let program = load(file)?;
            let q = query_of(&program, Some(query))?;
            let solver = opts.solver()?;
            let (result, time) = timed(|| solver.count_query(&program, &q));
            let (total, accepted) = result?;
            let p = semantics::ratio(accepted, total.clone())?;
            let time = opts.timing.then_some(time);
            if structured {
                return Ok(json(&SolveRecord::new(
                    &total,
                    Some(&p),
                    &solver.stats(),
                    time,
                )));
            }
            let mut out = format!("{}/{}\n{}", p.numer(), p.denom(), decimal(&p, *digits));
            if let Some(t) = time {
                out.push_str(&format!("\ntime\t{:.3}s", t.as_secs_f64()));
            }
            Ok(out)
        }
        Command::Wvs { file } => {
            let program = load(file)?;
            let views = semantics::world_views_capped(&program, opts.caps())?;
            let lines: Vec<String> = views
                .iter()
                .map(|v| v.display(program.table()).to_string())
                .collect();
            if structured {
                #[derive(Serialize)]
                struct Views {
                    count: usize,
                    world_views: Vec<String>,
                }
                return Ok(json(&Views {
                    count: lines.len(),
                    world_views: lines,
                }));
            }
            Ok(lines.join("\n"))
        }
        Command::Oracle { file, query } => {
            let program = load(file)?;
            let q = query_of(&program, query.as_deref())?;
            let (_, count) =
                semantics::count_extending(&program, &Wvi::new(), Some(&q), opts.caps())?;
            if structured {
                #[derive(Serialize)]
                struct Oracle {
                    count: String,
                }
                return Ok(json(&Oracle {
                    count: count.to_string(),
                }));
            }
            Ok(count.to_string())
        }
        Command::Graph {
            file,
            kind,
            abstraction,
        } => {
            let program = load(file)?;
            let g = graph_of(&program, *kind, abstraction.as_deref())?;
            Ok(g.to_dot(program.table()).trim_end().to_owned())
        }
        Command::Td {
            file,
            graph,
            abstraction,
            dot,
        } => {
            let program = load(file)?;
            let g = graph_of(&program, *graph, abstraction.as_deref())?;
            let nice = make_nice(&build_td(&g, opts.heuristic, opts.seed));
            if *dot {
                return Ok(nice.to_dot(&g, program.table()).trim_end().to_owned());
            }
            let stats = nice.stats();
            if structured {
                #[derive(Serialize)]
                struct TdRecord {
                    width: usize,
                    nodes: usize,
                    leaf: usize,
                    intr: usize,
                    rem: usize,
                    join: usize,
                }
                return Ok(json(&TdRecord {
                    width: stats.width,
                    nodes: stats.nodes,
                    leaf: stats.leaf,
                    intr: stats.introduce,
                    rem: stats.remove,
                    join: stats.join,
                }));
            }
            Ok(stats.to_string())
        }
        Command::Gen {
            spec,
            dimacs,
            output,
        } => {
            let spec: GenSpec = spec.join(" ").parse()?;
            let text = match (spec, dimacs) {
                (
                    GenSpec::Cnf {
                        vars,
                        clauses,
                        seed,
                    },
                    true,
                ) => bench::gen_random_cnf(vars, clauses, seed).to_string(),
                (_, true) => {
                    return Err(Failure::Usage(
                        "--dimacs applies to the cnf family only".into(),
                    ))
                }
                _ => spec.program()?.to_string(),
            };
            match output {
                Some(path) => {
                    std::fs::write(path, text)
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(text.trim_end().to_owned()),
            }
        }
        Command::Harness {
            specs,
            no_oracle,
            summary,
        } => {
            let specs = bench::parse_specs(&read_input(specs)?)?;
            let solver = opts.solver()?;
            let report = bench::run_harness(&specs, &solver, !no_oracle)?;
            let mut out = report.render(opts.timing);
            if *summary {
                let checked = report.records.iter().filter(|r| r.oracle.is_some()).count();
                out.push_str(&format!(
                    "instances {}\tchecked {}\tdisagree {}\n",
                    report.records.len(),
                    checked,
                    report.failures()
                ));
            }
            print!("{out}");
            match report.failures() {
                0 => Ok(String::new()),
                n => Err(Failure::Disagreement(n)),
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::NotPlain { .. }
        | Error::InvalidInput(_)
        | Error::ClauseTooLong { .. } => 3,
        Error::Backend(_) => 4,
        Error::BruteForceCapExceeded { .. } => 5,
        Error::NoWorldViews => 6,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Engine(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Disagreement(n)) => {
            eprintln!("error: {n} instance(s) disagree with the oracle");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        let p = |a: u32, b: u32| Probability::new(BigUint::from(a), BigUint::from(b));
        assert_eq!(decimal(&p(2, 3), 6), "0.666667");
        assert_eq!(decimal(&p(1, 1), 6), "1.000000");
        assert_eq!(decimal(&p(1, 3), 2), "0.33");
        assert_eq!(decimal(&p(1, 20), 1), "0.1");
        assert_eq!(decimal(&p(0, 1), 0), "0");
    }
}
