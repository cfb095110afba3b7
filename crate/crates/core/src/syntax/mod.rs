//! Concrete syntax: programs, goals and their annotated variants.

mod ast;
mod parse;

pub use ast::*;
pub use parse::{parse_goal, parse_goals_file, parse_program, ParseError, ParseErrors};
