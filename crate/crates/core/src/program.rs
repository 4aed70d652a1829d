//! Ground (epistemic) logic programs.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::atoms::{Atom, AtomTable, Literal};

/// One element of a rule body.
///
/// `Epistemic { outer_negated, inner }` stands for `not inner` when
/// `outer_negated` is false and for `-not inner` otherwise, where `not` is
/// epistemic negation. The modal shorthands desugar as
/// `K l = -not l`, `M l = not -l`, `-K l = not l` and `-M l = -not -l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyElement {
    Objective(Literal),
    Epistemic { outer_negated: bool, inner: Literal },
}

impl BodyElement {
    pub fn atom(&self) -> Atom {
        match *self {
            BodyElement::Objective(lit) => lit.atom,
            BodyElement::Epistemic { inner, .. } => inner.atom,
        }
    }

    pub fn is_epistemic(&self) -> bool {
        matches!(self, BodyElement::Epistemic { .. })
    }

    /// `K l`.
    pub fn known(inner: Literal) -> Self {
        BodyElement::Epistemic {
            outer_negated: true,
            inner,
        }
    }

    /// `-K l`, i.e. `not l`.
    pub fn not_known(inner: Literal) -> Self {
        BodyElement::Epistemic {
            outer_negated: false,
            inner,
        }
    }

    /// `M l`, i.e. `not -l`.
    pub fn possible(inner: Literal) -> Self {
        BodyElement::Epistemic {
            outer_negated: false,
            inner: inner.negate(),
        }
    }

    /// `-M l`, i.e. `-not -l`.
    pub fn not_possible(inner: Literal) -> Self {
        BodyElement::Epistemic {
            outer_negated: true,
            inner: inner.negate(),
        }
    }
}

/// `head_1 | ... | head_k :- body.` Head atoms are kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body: Vec<BodyElement>,
}

impl Rule {
    pub fn new(head: impl IntoIterator<Item = Atom>, body: Vec<BodyElement>) -> Self {
        let mut head: Vec<Atom> = head.into_iter().collect();
        head.sort_unstable();
        head.dedup();
        Self { head, body }
    }

    pub fn constraint(body: Vec<BodyElement>) -> Self {
        Self::new([], body)
    }

    pub fn fact(atom: Atom) -> Self {
        Self::new([atom], Vec::new())
    }

    /// The rule `atom :- atom.`, which is satisfied by every interpretation.
    pub fn tautology(atom: Atom) -> Self {
        Self::new([atom], vec![BodyElement::Objective(Literal::pos(atom))])
    }

    pub fn is_plain(&self) -> bool {
        !self.body.iter().any(BodyElement::is_epistemic)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut atoms: BTreeSet<Atom> = self.head.iter().copied().collect();
        atoms.extend(self.body.iter().map(BodyElement::atom));
        atoms
    }

    /// Atoms occurring inside epistemic literals.
    pub fn epistemic_atoms(&self) -> BTreeSet<Atom> {
        self.body
            .iter()
            .filter(|e| e.is_epistemic())
            .map(BodyElement::atom)
            .collect()
    }

    /// Atoms with a non-epistemic occurrence (head or objective literal).
    pub fn objective_atoms(&self) -> BTreeSet<Atom> {
        let mut atoms: BTreeSet<Atom> = self.head.iter().copied().collect();
        atoms.extend(self.body.iter().filter_map(|e| match e {
            BodyElement::Objective(lit) => Some(lit.atom),
            BodyElement::Epistemic { .. } => None,
        }));
        atoms
    }

    pub fn is_purely_epistemic(&self) -> bool {
        self.head.is_empty()
            && self
                .body
                .iter()
                .all(|e| matches!(e, BodyElement::Epistemic { .. }))
    }

    pub fn positive_body(&self) -> impl Iterator<Item = Atom> + '_ {
        self.body.iter().filter_map(|e| match e {
            BodyElement::Objective(lit) if lit.positive => Some(lit.atom),
            _ => None,
        })
    }

    pub fn negative_body(&self) -> impl Iterator<Item = Atom> + '_ {
        self.body.iter().filter_map(|e| match e {
            BodyElement::Objective(lit) if !lit.positive => Some(lit.atom),
            _ => None,
        })
    }
}

/// Result of [`Program::classify_atoms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomClassification {
    pub atoms: BTreeSet<Atom>,
    pub epistemic: BTreeSet<Atom>,
    pub objective: BTreeSet<Atom>,
    pub purely_epistemic_rules: Vec<usize>,
}

/// A list of rules over a shared atom table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    atoms: Arc<AtomTable>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(atoms: Arc<AtomTable>, rules: Vec<Rule>) -> Self {
        Self { atoms, rules }
    }

    pub fn empty(atoms: Arc<AtomTable>) -> Self {
        Self::new(atoms, Vec::new())
    }

    pub fn table(&self) -> &AtomTable {
        &self.atoms
    }

    pub fn table_arc(&self) -> &Arc<AtomTable> {
        &self.atoms
    }

    /// A program over the same atom table.
    pub fn with_rules(&self, rules: Vec<Rule>) -> Self {
        Self::new(Arc::clone(&self.atoms), rules)
    }

    pub fn is_plain(&self) -> bool {
        self.rules.iter().all(Rule::is_plain)
    }

    pub fn ensure_plain(&self) -> crate::Result<()> {
        match self.rules.iter().position(|r| !r.is_plain()) {
            Some(rule) => Err(crate::Error::NotPlain { rule }),
            None => Ok(()),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.rules.iter().flat_map(Rule::atoms).collect()
    }

    pub fn epistemic_atoms(&self) -> BTreeSet<Atom> {
        self.rules
            .iter()
            .flat_map(|r| r.epistemic_atoms())
            .collect()
    }

    pub fn objective_atoms(&self) -> BTreeSet<Atom> {
        self.rules
            .iter()
            .flat_map(|r| r.objective_atoms())
            .collect()
    }

    pub fn classify_atoms(&self) -> AtomClassification {
        AtomClassification {
            atoms: self.atoms(),
            epistemic: self.epistemic_atoms(),
            objective: self.objective_atoms(),
            purely_epistemic_rules: self
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| r.is_purely_epistemic())
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// Adds `a :- a.` for every atom that occurs only epistemically, so that
    /// every epistemic atom also occurs non-epistemically. Answer sets of every
    /// reduct, and therefore world views, are unchanged.
    pub fn normalized(&self) -> Program {
        let objective = self.objective_atoms();
        let mut rules = self.rules.clone();
        rules.extend(
            self.epistemic_atoms()
                .into_iter()
                .filter(|a| !objective.contains(a))
                .map(Rule::tautology),
        );
        self.with_rules(rules)
    }

    pub fn display_rule<'a>(&'a self, rule: &'a Rule) -> RuleDisplay<'a> {
        RuleDisplay {
            rule,
            table: &self.atoms,
        }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    table: &'a AtomTable,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.rule.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            f.write_str(self.table.name(*atom))?;
        }
        if !self.rule.body.is_empty() || self.rule.head.is_empty() {
            if self.rule.head.is_empty() {
                f.write_str(":-")?;
            } else {
                f.write_str(" :-")?;
            }
            for (i, elem) in self.rule.body.iter().enumerate() {
                f.write_str(if i == 0 { " " } else { ", " })?;
                match *elem {
                    BodyElement::Objective(lit) => write!(f, "{}", lit.display(self.table))?,
                    BodyElement::Epistemic {
                        outer_negated,
                        inner,
                    } => {
                        let op = if outer_negated { "K" } else { "not" };
                        write!(f, "{op} {}", inner.display(self.table))?;
                    }
                }
            }
            if self.rule.body.is_empty() {
                f.write_str(" ")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{}", self.display_rule(rule))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    #[test]
    fn classification_of_running_example() {
        let p = parse_program(crate::examples::RUNNING).unwrap();
        let c = p.classify_atoms();
        let names: Vec<_> = c.epistemic.iter().map(|a| p.table().name(*a)).collect();
        assert_eq!(names, ["a", "b", "c", "d"]);
        // r8..r12 in 1-based numbering
        assert_eq!(c.purely_epistemic_rules, vec![7, 8, 9, 10, 11]);
    }

    #[test]
    fn plain_program_has_no_epistemic_atoms() {
        let p = parse_program(crate::examples::PLAIN).unwrap();
        assert!(p.epistemic_atoms().is_empty());
        assert!(p.is_plain());
    }

    #[test]
    fn purely_epistemic_constraint() {
        let p = parse_program(":- -K v.").unwrap();
        let c = p.classify_atoms();
        assert_eq!(c.epistemic.len(), 1);
        assert!(c.objective.is_empty());
        assert_eq!(c.purely_epistemic_rules, vec![0]);
    }

    #[test]
    fn normalization_adds_tautologies_only_where_needed() {
        let p = parse_program("a :- -K b. b :- c. :- K d.").unwrap();
        let n = p.normalized();
        assert_eq!(n.rules.len(), 4);
        assert_eq!(n.rules[3], Rule::tautology(p.table().lookup("d").unwrap()));
        assert!(n.epistemic_atoms().is_subset(&n.objective_atoms()));
    }

    #[test]
    fn display_round_trips() {
        let src = "a | b.\nc :- -d.\na :- not b.\n:- K c, K d.\n:- .\nx :- not -y, K -z.\n";
        let p = parse_program(src).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p.rules, again.rules);
    }
}
