//! Terms, rules and programs of the supported ASP dialect, with parsing,
//! printing, unification and grounding.

mod ground;
mod parser;
mod term;
mod unify;

pub use ground::{expand_ranges, ground, ground_with, GroundError, GroundOptions, TypeRegistry};
pub use parser::{parse_atom, parse_program, parse_term, validate, ParseError};
pub use term::{Atom, Bindings, Literal, Program, Rule, Symbol, Term};
pub use unify::{unify, unify_atom_with};
