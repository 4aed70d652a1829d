//! Atom interning and literals.

use std::collections::HashMap;
use std::fmt;

/// Dense index of an interned atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(pub u32);

impl Atom {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijection between atom names and dense indices `0..n`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    names: Vec<String>,
    ids: HashMap<String, Atom>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `name`, returning the existing id if it is already known.
    pub fn insert(&mut self, name: &str) -> Atom {
        if let Some(&atom) = self.ids.get(name) {
            return atom;
        }
        let atom = Atom(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), atom);
        atom
    }

    pub fn lookup(&self, name: &str) -> Option<Atom> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.names.len() as u32).map(Atom)
    }

    /// Returns a name not yet present in the table, starting from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.lookup(base).is_none() {
            return base.to_owned();
        }
        (0..)
            .map(|i| format!("{base}{i}"))
            .find(|candidate| self.lookup(candidate).is_none())
            .expect("unbounded search")
    }
}

/// An atom or its default negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Self {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Self {
            atom,
            positive: false,
        }
    }

    pub fn negate(self) -> Self {
        Self {
            atom: self.atom,
            positive: !self.positive,
        }
    }

    pub fn display(self, table: &AtomTable) -> LiteralDisplay<'_> {
        LiteralDisplay {
            literal: self,
            table,
        }
    }
}

pub struct LiteralDisplay<'a> {
    literal: Literal,
    table: &'a AtomTable,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.literal.positive {
            f.write_str("-")?;
        }
        f.write_str(self.table.name(self.literal.atom))
    }
}
