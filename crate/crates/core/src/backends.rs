//! Base solvers: the internal enumerating solver and an adapter for external
//! solver processes.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::atoms::Literal;
use crate::program::{BodyElement, Program, Rule};
use crate::semantics::{self, Caps};
use crate::wvi::Wvi;
use crate::{Count, Result};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("external solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("failed to run external solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver exited with {status}: {stderr}")]
    Exit { status: String, stderr: String },
    #[error("cannot parse external solver output {0:?}")]
    Parse(String),
    #[error("invalid command template: {0}")]
    Template(String),
}

/// Questions about a plain program.
#[derive(Debug, Clone, Copy)]
pub enum AspMode<'a> {
    /// Does an answer set exist?
    Exists,
    /// Does every answer set contain the positive and avoid the negative
    /// literals of the interpretation? Vacuously true without answer sets.
    ForbidAll(&'a Wvi),
}

/// Questions about an epistemic program `Π`.
#[derive(Debug, Clone, Copy)]
pub enum ElpMode<'a> {
    /// Does `Π ⊔ W` have a world view? Answered as 0 or 1.
    WvExists(&'a Wvi),
    /// Number of world views of `Π ⊔ W`, restricted to those accepting the
    /// query if one is given.
    CountWv { w: &'a Wvi, query: Option<&'a Wvi> },
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve_asp(&self, program: &Program, mode: AspMode<'_>) -> Result<bool>;

    fn solve_elp(&self, program: &Program, mode: ElpMode<'_>) -> Result<Count>;

    /// World views of `Π ⊔ W` and how many of them accept `query`.
    fn count_with_query(&self, program: &Program, w: &Wvi, query: &Wvi) -> Result<(Count, Count)> {
        let total = self.solve_elp(program, ElpMode::CountWv { w, query: None })?;
        let accepted = if total.is_zero() {
            BigUint::zero()
        } else {
            self.solve_elp(
                program,
                ElpMode::CountWv {
                    w,
                    query: Some(query),
                },
            )?
        };
        Ok((total, accepted))
    }
}

/// Enumerating solver built on [`crate::semantics`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Internal {
    pub caps: Caps,
}

impl Internal {
    pub fn new(caps: Caps) -> Self {
        Self { caps }
    }
}

fn satisfies(set: &semantics::Interpretation, w: &Wvi) -> bool {
    w.literals().all(|l| set.contains(&l.atom) == l.positive)
}

impl Backend for Internal {
    fn name(&self) -> &'static str {
        "internal"
    }

    fn solve_asp(&self, program: &Program, mode: AspMode<'_>) -> Result<bool> {
        let sets = semantics::answer_sets_capped(program, self.caps.atoms)?;
        Ok(match mode {
            AspMode::Exists => !sets.is_empty(),
            AspMode::ForbidAll(w) => sets.iter().all(|s| satisfies(s, w)),
        })
    }

    fn solve_elp(&self, program: &Program, mode: ElpMode<'_>) -> Result<Count> {
        match mode {
            ElpMode::WvExists(w) => {
                let (total, _) = semantics::count_extending(program, w, None, self.caps)?;
                Ok(BigUint::from(u8::from(!total.is_zero())))
            }
            ElpMode::CountWv { w, query } => {
                let (_, accepted) = semantics::count_extending(program, w, query, self.caps)?;
                Ok(accepted)
            }
        }
    }

    fn count_with_query(&self, program: &Program, w: &Wvi, query: &Wvi) -> Result<(Count, Count)> {
        semantics::count_extending(program, w, Some(query), self.caps)
    }
}

/// How the standard output of an external solver is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseMode {
    /// The whole output is one decimal number.
    Count,
    /// A line equal to the marker means yes, its absence means no.
    Sat { marker: String },
}

/// Turns a program into the text handed to the external solver.
pub type Emitter = Arc<dyn Fn(&Program) -> String + Send + Sync>;

#[derive(Debug, Clone)]
pub struct ExternalConfig {
    /// Program and arguments; exactly one token contains `{file}`.
    pub command: Vec<String>,
    pub parse: ParseMode,
    pub timeout: Duration,
}

impl ExternalConfig {
    /// Splits a whitespace-separated template such as `solver --count {file}`.
    pub fn from_template(template: &str, parse: ParseMode, timeout: Duration) -> Result<Self> {
        let command: Vec<String> = template.split_whitespace().map(str::to_owned).collect();
        let placeholders: usize = command.iter().map(|t| t.matches("{file}").count()).sum();
        if command.is_empty() {
            return Err(BackendError::Template("empty command".into()).into());
        }
        if placeholders != 1 {
            return Err(BackendError::Template(format!(
                "expected exactly one {{file}} placeholder, found {placeholders}"
            ))
            .into());
        }
        Ok(Self {
            command,
            parse,
            timeout,
        })
    }
}

/// Runs an external program on a temporary file holding the emitted program.
#[derive(Clone)]
pub struct External {
    config: ExternalConfig,
    emitter: Emitter,
}

impl std::fmt::Debug for External {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("External")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl External {
    pub fn new(config: ExternalConfig) -> Self {
        Self {
            config,
            emitter: Arc::new(|p: &Program| p.to_string()),
        }
    }

    pub fn with_emitter(mut self, emitter: Emitter) -> Self {
        self.emitter = emitter;
        self
    }

    /// Runs the solver and returns its standard output.
    pub fn run(&self, program: &Program) -> Result<String> {
        let text = (self.emitter)(program);
        let mut file = tempfile::Builder::new()
            .suffix(".elp")
            .tempfile()
            .map_err(BackendError::Io)?;
        file.write_all(text.as_bytes()).map_err(BackendError::Io)?;
        file.flush().map_err(BackendError::Io)?;
        let path = file.path().to_string_lossy().into_owned();

        let args: Vec<String> = self.config.command[1..]
            .iter()
            .map(|t| t.replace("{file}", &path))
            .collect();
        let program_name = self.config.command[0].replace("{file}", &path);
        let mut child = Command::new(program_name)
            .args(&args)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0)
            .spawn()
            .map_err(BackendError::Io)?;

        let mut stdout = child.stdout.take().expect("piped stdout");
        let mut stderr = child.stderr.take().expect("piped stderr");
        let out = thread::spawn(move || {
            let mut buf = String::new();
            stdout.read_to_string(&mut buf).map(|_| buf)
        });
        let err = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });

        let start = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait().map_err(BackendError::Io)? {
                break status;
            }
            if start.elapsed() >= self.config.timeout {
                // SAFETY: kill(2) on the process group created for the child.
                unsafe {
                    libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
                }
                let _ = child.wait();
                return Err(BackendError::Timeout(self.config.timeout).into());
            }
            thread::sleep(Duration::from_millis(5));
        };
        let stdout = out
            .join()
            .expect("reader thread")
            .map_err(BackendError::Io)?;
        let stderr = err.join().expect("reader thread");
        if !status.success() {
            return Err(BackendError::Exit {
                status: status.to_string(),
                stderr: stderr.trim().to_owned(),
            }
            .into());
        }
        Ok(stdout)
    }

    fn parse_count(output: &str) -> Result<Count> {
        output
            .trim()
            .parse::<BigUint>()
            .map_err(|_| BackendError::Parse(output.to_owned()).into())
    }

    fn yes(&self, program: &Program) -> Result<bool> {
        let output = self.run(program)?;
        match &self.config.parse {
            ParseMode::Count => Ok(!Self::parse_count(&output)?.is_zero()),
            ParseMode::Sat { marker } => Ok(output.lines().any(|l| l.trim() == marker)),
        }
    }
}

/// `program` extended so that its answer sets are exactly those violating
/// some literal of `w`.
fn violation_program(program: &Program, w: &Wvi) -> Program {
    let mut table = program.table().clone();
    let name = table.fresh_name("violated");
    let viol = table.insert(&name);
    let mut rules = program.rules.clone();
    for lit in w.literals() {
        rules.push(Rule::new(
            [viol],
            vec![BodyElement::Objective(lit.negate())],
        ));
    }
    rules.push(Rule::constraint(vec![BodyElement::Objective(
        Literal::neg(viol),
    )]));
    Program::new(Arc::new(table), rules)
}

/// `Π ⊔ W` plus constraints keeping only world views that accept `query`.
fn counting_program(program: &Program, w: &Wvi, query: Option<&Wvi>) -> Program {
    let mut out = semantics::adjoin_wvi(program, w);
    if let Some(query) = query {
        for lit in query.literals() {
            let elem = if lit.positive {
                BodyElement::not_known(lit)
            } else {
                BodyElement::known(lit.negate())
            };
            out.rules.push(Rule::constraint(vec![elem]));
        }
    }
    out
}

impl Backend for External {
    fn name(&self) -> &'static str {
        "external"
    }

    fn solve_asp(&self, program: &Program, mode: AspMode<'_>) -> Result<bool> {
        program.ensure_plain()?;
        match mode {
            AspMode::Exists => self.yes(program),
            AspMode::ForbidAll(w) => {
                if w.literals().next().is_none() {
                    return Ok(true);
                }
                Ok(!self.yes(&violation_program(program, w))?)
            }
        }
    }

    fn solve_elp(&self, program: &Program, mode: ElpMode<'_>) -> Result<Count> {
        match mode {
            ElpMode::WvExists(w) => {
                let yes = self.yes(&counting_program(program, w, None))?;
                Ok(BigUint::from(u8::from(yes)))
            }
            ElpMode::CountWv { w, query } => match &self.config.parse {
                ParseMode::Count => {
                    Self::parse_count(&self.run(&counting_program(program, w, query))?)
                }
                ParseMode::Sat { .. } => Err(BackendError::Parse(
                    "a sat-mode solver cannot answer counting queries".into(),
                )
                .into()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{PLAIN, RUNNING};
    use crate::parse::{parse_program, parse_query};
    use crate::semantics::answer_sets;

    #[test]
    fn internal_asp_modes() {
        let p = parse_program(PLAIN).unwrap();
        let b = Internal::default();
        assert!(b.solve_asp(&p, AspMode::Exists).unwrap());
        let a = parse_query(p.table(), "a").unwrap();
        assert!(!b.solve_asp(&p, AspMode::ForbidAll(&a)).unwrap());
        let unsat = parse_program(":- .").unwrap();
        assert!(!b.solve_asp(&unsat, AspMode::Exists).unwrap());
    }

    #[test]
    fn internal_elp_modes() {
        let p = parse_program(RUNNING).unwrap();
        let b = Internal::default();
        let all = b
            .solve_elp(
                &p,
                ElpMode::CountWv {
                    w: &Wvi::new(),
                    query: None,
                },
            )
            .unwrap();
        assert_eq!(all, BigUint::from(3u32));
        let a = parse_query(p.table(), "a").unwrap();
        assert_eq!(
            b.solve_elp(&p, ElpMode::WvExists(&a)).unwrap(),
            BigUint::from(1u32)
        );
        let mut text = RUNNING.to_owned();
        text.push_str(":- K a.\n:- K -a.\n:- K b.\n");
        let dead = parse_program(&text).unwrap();
        assert!(b
            .solve_elp(
                &dead,
                ElpMode::CountWv {
                    w: &Wvi::new(),
                    query: None
                }
            )
            .unwrap()
            .is_zero());
    }

    #[test]
    fn violation_rewriting_selects_violating_sets() {
        let p = parse_program(PLAIN).unwrap();
        let w = parse_query(p.table(), "a,-d").unwrap();
        let rewritten = violation_program(&p, &w);
        let violating = answer_sets(&rewritten).unwrap();
        let direct: Vec<_> = answer_sets(&p)
            .unwrap()
            .into_iter()
            .filter(|s| !satisfies(s, &w))
            .collect();
        assert_eq!(violating.len(), direct.len());
        assert_eq!(violating.len(), 3);
    }

    #[test]
    fn query_constraints_filter_world_views() {
        let p = parse_program(RUNNING).unwrap();
        let q = parse_query(p.table(), "a,-b").unwrap();
        let filtered = counting_program(&p, &Wvi::new(), Some(&q));
        let views = semantics::world_views_bruteforce(&filtered).unwrap();
        assert_eq!(views.len(), 2);
    }

    #[test]
    fn template_validation() {
        let t = Duration::from_secs(1);
        assert!(ExternalConfig::from_template("solver {file}", ParseMode::Count, t).is_ok());
        assert!(ExternalConfig::from_template("solver", ParseMode::Count, t).is_err());
        assert!(ExternalConfig::from_template("s {file} {file}", ParseMode::Count, t).is_err());
        assert!(ExternalConfig::from_template("", ParseMode::Count, t).is_err());
    }

    fn shell(script: &str, parse: ParseMode, timeout: Duration) -> External {
        let config = ExternalConfig {
            command: vec![
                "sh".into(),
                "-c".into(),
                script.into(),
                "sh".into(),
                "{file}".into(),
            ],
            parse,
            timeout,
        };
        External::new(config)
    }

    #[test]
    fn external_count_and_sat_parsing() {
        let p = parse_program(PLAIN).unwrap();
        let count = shell("echo 7", ParseMode::Count, Duration::from_secs(5));
        assert_eq!(
            count
                .solve_elp(
                    &p,
                    ElpMode::CountWv {
                        w: &Wvi::new(),
                        query: None
                    }
                )
                .unwrap(),
            BigUint::from(7u32)
        );
        let sat = shell(
            "echo c comment; echo SATISFIABLE",
            ParseMode::Sat {
                marker: "SATISFIABLE".into(),
            },
            Duration::from_secs(5),
        );
        assert!(sat.solve_asp(&p, AspMode::Exists).unwrap());
        let unsat = shell(
            "echo UNSATISFIABLE",
            ParseMode::Sat {
                marker: "SATISFIABLE".into(),
            },
            Duration::from_secs(5),
        );
        assert!(!unsat.solve_asp(&p, AspMode::Exists).unwrap());
    }

    #[test]
    fn external_sees_the_program_file() {
        let p = parse_program(PLAIN).unwrap();
        let lines = shell("wc -l < \"$1\"", ParseMode::Count, Duration::from_secs(5));
        let n = lines
            .solve_elp(
                &p,
                ElpMode::CountWv {
                    w: &Wvi::new(),
                    query: None,
                },
            )
            .unwrap();
        assert_eq!(n, BigUint::from(3u32));
    }

    #[test]
    fn external_failures() {
        let p = parse_program(PLAIN).unwrap();
        let garbage = shell("echo nope", ParseMode::Count, Duration::from_secs(5));
        assert!(matches!(
            garbage.solve_asp(&p, AspMode::Exists),
            Err(crate::Error::Backend(BackendError::Parse(_)))
        ));
        let failing = shell("echo 3; exit 2", ParseMode::Count, Duration::from_secs(5));
        assert!(matches!(
            failing.solve_asp(&p, AspMode::Exists),
            Err(crate::Error::Backend(BackendError::Exit { .. }))
        ));
        let slow = shell(
            "sleep 10 & sleep 10; echo 1",
            ParseMode::Count,
            Duration::from_millis(200),
        );
        let start = Instant::now();
        assert!(matches!(
            slow.solve_asp(&p, AspMode::Exists),
            Err(crate::Error::Backend(BackendError::Timeout(_)))
        ));
        assert!(start.elapsed() < Duration::from_secs(5));
    }
}
