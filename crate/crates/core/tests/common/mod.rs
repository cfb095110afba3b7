#![allow(dead_code)]

pub mod gen;
pub mod ground;

use std::path::PathBuf;

use chru_core::syntax::{parse_goals_file, parse_program, Goal, Program};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_program(name: &str) -> Program {
    parse_program(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_goals(name: &str) -> Vec<Goal> {
    parse_goals_file(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}
