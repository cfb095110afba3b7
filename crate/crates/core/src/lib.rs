//! Constraint Handling Rules: an interpreter for the plain and annotated
//! operational semantics, a rule unfolder with replacement-safety checks,
//! and bounded analyses (qualified answers, termination, confluence).

pub mod analysis;
pub mod batch;
pub mod builtins;
pub(crate) mod canon;
pub mod engine;
pub mod syntax;
pub mod term;
pub mod transform;
