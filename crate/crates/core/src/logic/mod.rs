//! First-order representation: terms, parsing, built-ins and coverage.

pub mod builtin;
pub mod cover;
pub mod lexer;
pub mod parse;
pub mod term;
pub mod variablize;

pub use builtin::{eval_builtin, BuiltinDef, BuiltinRegistry};
pub use cover::{covers, covers_with_budget, Coverage, DEFAULT_NODE_BUDGET};
pub use parse::{parse_example, parse_literal, parse_theory, GroundExample};
pub use term::{apply_substitution, Clause, Literal, Substitution, Term, Theory};
pub use variablize::variablize;
