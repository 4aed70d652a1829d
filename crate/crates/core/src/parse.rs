//! Text format for ground epistemic programs.
//!
//! ```text
//! rule  := [head] [":-" [body]] "."
//! head  := atom {("|" | ";") atom}
//! body  := elem {"," elem}
//! elem  := lit | "not" lit | "-not" lit | "K" lit | "-K" lit | "M" lit | "-M" lit
//! lit   := ["-"] name
//! name  := [a-z][A-Za-z0-9_]*
//! ```
//!
//! `%` starts a comment running to the end of the line. A rule without head
//! and body (`:- .`) is the unsatisfiable constraint.

use std::sync::Arc;

use crate::atoms::{AtomTable, Literal};
use crate::program::{BodyElement, Program, Rule};
use crate::wvi::Wvi;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Name(String),
    Not,
    Know,
    Maybe,
    Minus,
    Or,
    If,
    Comma,
    Dot,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Name(n) => format!("`{n}`"),
            Token::Not => "`not`".into(),
            Token::Know => "`K`".into(),
            Token::Maybe => "`M`".into(),
            Token::Minus => "`-`".into(),
            Token::Or => "`|`".into(),
            Token::If => "`:-`".into(),
            Token::Comma => "`,`".into(),
            Token::Dot => "`.`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<(Vec<Spanned>, (usize, usize))> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        match c {
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => bump(&mut chars),
            '-' => {
                bump(&mut chars);
                tokens.push(Spanned {
                    token: Token::Minus,
                    line: tl,
                    column: tc,
                });
            }
            '|' | ';' => {
                bump(&mut chars);
                tokens.push(Spanned {
                    token: Token::Or,
                    line: tl,
                    column: tc,
                });
            }
            ',' => {
                bump(&mut chars);
                tokens.push(Spanned {
                    token: Token::Comma,
                    line: tl,
                    column: tc,
                });
            }
            '.' => {
                bump(&mut chars);
                tokens.push(Spanned {
                    token: Token::Dot,
                    line: tl,
                    column: tc,
                });
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() != Some(&'-') {
                    return Err(syntax(tl, tc, "expected `:-`"));
                }
                bump(&mut chars);
                tokens.push(Spanned {
                    token: Token::If,
                    line: tl,
                    column: tc,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                let token =
                    match word.as_str() {
                        "not" => Token::Not,
                        "K" => Token::Know,
                        "M" => Token::Maybe,
                        w if w.starts_with(|c: char| c.is_ascii_lowercase()) => Token::Name(word),
                        _ => return Err(syntax(
                            tl,
                            tc,
                            format!(
                                "invalid atom name `{word}` (names start with a lowercase letter)"
                            ),
                        )),
                    };
                tokens.push(Spanned {
                    token,
                    line: tl,
                    column: tc,
                });
            }
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    Ok((tokens, (line, column)))
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    table: AtomTable,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).map(|s| s.token.clone());
        self.pos += 1;
        token
    }

    fn expect_name(&mut self) -> Result<String> {
        match self.peek() {
            Some(Token::Name(_)) => match self.next() {
                Some(Token::Name(n)) => Ok(n),
                _ => unreachable!(),
            },
            Some(Token::Minus) => Err(self.error("duplicate negation")),
            Some(t) => Err(self.error(format!("expected an atom name, found {}", t.describe()))),
            None => Err(self.error("expected an atom name, found end of input")),
        }
    }

    /// `["-"] name`
    fn literal(&mut self) -> Result<Literal> {
        let positive = if self.peek() == Some(&Token::Minus) {
            self.next();
            false
        } else {
            true
        };
        let name = self.expect_name()?;
        let atom = self.table.insert(&name);
        Ok(Literal { atom, positive })
    }

    fn element(&mut self) -> Result<BodyElement> {
        let negated = if self.peek() == Some(&Token::Minus) {
            self.next();
            true
        } else {
            false
        };
        let elem = match self.peek() {
            Some(Token::Minus) => return Err(self.error("duplicate negation")),
            Some(Token::Not) => {
                self.next();
                BodyElement::Epistemic {
                    outer_negated: negated,
                    inner: self.literal()?,
                }
            }
            Some(Token::Know) => {
                self.next();
                let lit = self.literal()?;
                if negated {
                    BodyElement::not_known(lit)
                } else {
                    BodyElement::known(lit)
                }
            }
            Some(Token::Maybe) => {
                self.next();
                let lit = self.literal()?;
                if negated {
                    BodyElement::not_possible(lit)
                } else {
                    BodyElement::possible(lit)
                }
            }
            Some(Token::Name(_)) => {
                let name = self.expect_name()?;
                let atom = self.table.insert(&name);
                BodyElement::Objective(Literal {
                    atom,
                    positive: !negated,
                })
            }
            Some(t) => {
                return Err(self.error(format!("expected a body element, found {}", t.describe())))
            }
            None => return Err(self.error("expected a body element, found end of input")),
        };
        Ok(elem)
    }

    fn head_atom(&mut self) -> Result<crate::atoms::Atom> {
        match self.peek() {
            Some(Token::Name(_)) => {
                let name = self.expect_name()?;
                Ok(self.table.insert(&name))
            }
            Some(Token::Not | Token::Know | Token::Maybe) => {
                Err(self.error("epistemic literal in head"))
            }
            Some(Token::Minus) => {
                if matches!(
                    self.tokens.get(self.pos + 1).map(|s| &s.token),
                    Some(Token::Not | Token::Know | Token::Maybe)
                ) {
                    Err(self.error("epistemic literal in head"))
                } else {
                    Err(self.error("negated literal in head"))
                }
            }
            Some(t) => Err(self.error(format!("expected a head atom, found {}", t.describe()))),
            None => Err(self.error("expected a head atom, found end of input")),
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let mut head = Vec::new();
        if self.peek() != Some(&Token::If) {
            if self.peek() == Some(&Token::Dot) {
                return Err(self.error("empty rule"));
            }
            head.push(self.head_atom()?);
            while self.peek() == Some(&Token::Or) {
                self.next();
                head.push(self.head_atom()?);
            }
        }
        let mut body = Vec::new();
        match self.next() {
            Some(Token::Dot) => return Ok(Rule::new(head, body)),
            Some(Token::If) => {}
            Some(t) => {
                self.pos -= 1;
                return Err(self.error(format!("expected `:-` or `.`, found {}", t.describe())));
            }
            None => return Err(self.error("expected `.`, found end of input")),
        }
        if self.peek() != Some(&Token::Dot) {
            body.push(self.element()?);
            while self.peek() == Some(&Token::Comma) {
                self.next();
                body.push(self.element()?);
            }
        }
        match self.next() {
            Some(Token::Dot) => Ok(Rule::new(head, body)),
            Some(t) => {
                self.pos -= 1;
                Err(self.error(format!("expected `,` or `.`, found {}", t.describe())))
            }
            None => Err(self.error("expected `.`, found end of input")),
        }
    }
}

/// Parses a program, interning atoms in order of first occurrence.
pub fn parse_program(text: &str) -> Result<Program> {
    let (tokens, end) = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end,
        table: AtomTable::new(),
    };
    let mut rules = Vec::new();
    while parser.peek().is_some() {
        rules.push(parser.rule()?);
    }
    Ok(Program::new(Arc::new(parser.table), rules))
}

/// Parses a comma-separated literal list such as `a,-b` into a WVI whose
/// domain is exactly the listed atoms. Every atom must exist in `table`.
pub fn parse_query(table: &AtomTable, text: &str) -> Result<Wvi> {
    let mut wvi = Wvi::default();
    for (i, part) in text.split(',').enumerate() {
        let part = part.trim();
        if part.is_empty() {
            if text.trim().is_empty() {
                break;
            }
            return Err(Error::InvalidInput(format!(
                "empty query literal at position {}",
                i + 1
            )));
        }
        let (positive, name) = match part.strip_prefix('-') {
            Some(rest) => (false, rest.trim()),
            None => (true, part),
        };
        let atom = table
            .lookup(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown atom `{name}` in query")))?;
        if let Some(previous) = wvi.value(atom) {
            if previous != Some(positive) {
                return Err(Error::InvalidInput(format!(
                    "conflicting query literals for `{name}`"
                )));
            }
        }
        wvi.decide(atom, positive);
    }
    Ok(wvi)
}
