//! Small programs used by tests, docs and the command line.

/// A disjunctive program with four answer sets.
pub const PLAIN: &str = "\
a | b.
c :- -d.
d :- -c.
";

/// An epistemic extension of [`PLAIN`] with three world views:
/// `{a, d, -b, -c}`, `{a, c, -b, -d}` and `{b, c, -a, -d}`.
pub const RUNNING: &str = "\
a | b.
c :- -d.
d :- -c.
a :- -K b.
b :- -K a.
c :- -K d.
d :- -K c.
:- -K a, -K -a.
:- -K b, -K -b.
:- -K a, -K c.
:- -K a, -K b, K c.
:- K c, K d.
";
