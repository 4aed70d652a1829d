//! Ground epistemic logic programs: world view semantics, brute-force
//! oracles, and world view counting by nested dynamic programming over tree
//! decompositions.
//!
//! ```
//! use elp_core::{parse_program, semantics};
//!
//! let program = parse_program("a | b. a :- -K b. b :- -K a.").unwrap();
//! let views = semantics::world_views_bruteforce(&program).unwrap();
//! assert_eq!(views.len(), 2);
//! ```

pub mod atoms;
pub mod backends;
pub mod bench;
pub mod cnf;
pub mod decomp;
pub mod dp;
mod error;
pub mod examples;
pub mod graphs;
pub mod parse;
pub mod program;
pub mod semantics;
pub mod wvi;

pub use atoms::{Atom, AtomTable, Literal};
pub use error::{Error, Result};
pub use parse::{parse_program, parse_query};
pub use program::{BodyElement, Program, Rule};
pub use wvi::Wvi;

/// Arbitrary-precision counter used for all counts.
pub type Count = num_bigint::BigUint;
/// Exact probability.
pub type Probability = num_rational::Ratio<num_bigint::BigUint>;
