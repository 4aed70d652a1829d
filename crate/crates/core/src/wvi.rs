//! World view interpretations: three-valued partial assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::atoms::{Atom, AtomTable, Literal};

/// A consistent set of literals over an explicit domain of atoms.
///
/// Atoms of the domain that carry no literal are *undecided* (possible).
/// Atoms outside the domain are not talked about at all.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wvi {
    domain: BTreeSet<Atom>,
    decided: BTreeMap<Atom, bool>,
}

impl Wvi {
    pub fn new() -> Self {
        Self::default()
    }

    /// All atoms of `domain` undecided.
    pub fn undecided_over(domain: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            domain: domain.into_iter().collect(),
            decided: BTreeMap::new(),
        }
    }

    pub fn from_literals(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut wvi = Self::new();
        for lit in literals {
            wvi.decide(lit.atom, lit.positive);
        }
        wvi
    }

    pub fn domain(&self) -> &BTreeSet<Atom> {
        &self.domain
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    /// Puts `atom` into the domain and decides it.
    pub fn decide(&mut self, atom: Atom, value: bool) {
        self.domain.insert(atom);
        self.decided.insert(atom, value);
    }

    /// Puts `atom` into the domain and leaves it undecided.
    pub fn leave_undecided(&mut self, atom: Atom) {
        self.domain.insert(atom);
        self.decided.remove(&atom);
    }

    /// Sets `atom` to `value`, where `None` means undecided.
    pub fn set(&mut self, atom: Atom, value: Option<bool>) {
        match value {
            Some(v) => self.decide(atom, v),
            None => self.leave_undecided(atom),
        }
    }

    pub fn remove(&mut self, atom: Atom) {
        self.domain.remove(&atom);
        self.decided.remove(&atom);
    }

    /// `None` if `atom` is outside the domain, `Some(None)` if undecided.
    pub fn value(&self, atom: Atom) -> Option<Option<bool>> {
        if self.domain.contains(&atom) {
            Some(self.decided.get(&atom).copied())
        } else {
            None
        }
    }

    /// Whether `lit` belongs to the interpretation, i.e. is known.
    pub fn contains(&self, lit: Literal) -> bool {
        self.decided.get(&lit.atom) == Some(&lit.positive)
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.decided
            .iter()
            .map(|(&atom, &positive)| Literal { atom, positive })
    }

    pub fn undecided(&self) -> impl Iterator<Item = Atom> + '_ {
        self.domain
            .iter()
            .copied()
            .filter(|a| !self.decided.contains_key(a))
    }

    pub fn is_fully_decided(&self) -> bool {
        self.decided.len() == self.domain.len()
    }

    /// Restriction to the atoms in `atoms`.
    pub fn restrict(&self, atoms: &BTreeSet<Atom>) -> Wvi {
        Wvi {
            domain: self.domain.intersection(atoms).copied().collect(),
            decided: self
                .decided
                .iter()
                .filter(|(a, _)| atoms.contains(a))
                .map(|(&a, &v)| (a, v))
                .collect(),
        }
    }

    /// Union of two interpretations; `None` if they disagree on a shared atom.
    pub fn union(&self, other: &Wvi) -> Option<Wvi> {
        let mut out = self.clone();
        for &atom in &other.domain {
            let value = other.decided.get(&atom).copied();
            if let Some(existing) = self.value(atom) {
                if existing != value {
                    return None;
                }
            }
            out.set(atom, value);
        }
        Some(out)
    }

    /// Whether `self` and `other` agree on every atom of `other`'s domain.
    pub fn agrees_with(&self, other: &Wvi) -> bool {
        other
            .domain
            .iter()
            .all(|&a| self.value(a) == other.value(a))
    }

    pub fn display<'a>(&'a self, table: &'a AtomTable) -> WviDisplay<'a> {
        WviDisplay { wvi: self, table }
    }
}

/// Renders as `{a, -b, ?c}` in atom order, with `?` marking undecided atoms.
pub struct WviDisplay<'a> {
    wvi: &'a Wvi,
    table: &'a AtomTable,
}

impl fmt::Display for WviDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, &atom) in self.wvi.domain.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let prefix = match self.wvi.decided.get(&atom) {
                Some(true) => "",
                Some(false) => "-",
                None => "?",
            };
            write!(f, "{prefix}{}", self.table.name(atom))?;
        }
        f.write_str("}")
    }
}
