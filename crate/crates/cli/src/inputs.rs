//! Loading programs and goals from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use chru_core::engine::Subject;
use chru_core::syntax::{parse_goal, parse_goals_file, parse_program, Goal, Program, Semantics};

use crate::SemanticsArg;

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn program(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).with_context(|| format!("parse error in {}", path.display()))
}

pub fn semantics(path: &Path, over: Option<SemanticsArg>) -> Semantics {
    match over {
        Some(SemanticsArg::Plain) => Semantics::Plain,
        Some(SemanticsArg::Annotated) => Semantics::Annotated,
        None => Semantics::from_path(path),
    }
}

pub fn subject(path: &Path, over: Option<SemanticsArg>) -> Result<Subject> {
    Ok(Subject::new(program(path)?, semantics(path, over)))
}

fn is_program_file(path: &Path) -> bool {
    path.is_file() && matches!(path.extension().and_then(|e| e.to_str()), Some("chr" | "achr"))
}

/// Positional arguments split into program files and goals.  Existing
/// `.chr`/`.achr` files are programs, other existing files are goal files
/// and anything else is a goal.
#[derive(Debug, Default)]
pub struct Inputs {
    pub programs: Vec<PathBuf>,
    pub goals: Vec<Goal>,
}

pub fn classify(args: &[String], allow_programs: bool) -> Result<Inputs> {
    let mut out = Inputs::default();
    for a in args {
        let path = Path::new(a);
        if is_program_file(path) {
            if !allow_programs {
                bail!("unexpected program file {a}");
            }
            out.programs.push(path.to_path_buf());
        } else if path.is_file() {
            let gs = parse_goals_file(&read(path)?).with_context(|| format!("parse error in {a}"))?;
            out.goals.extend(gs);
        } else {
            out.goals.push(parse_goal(a).with_context(|| format!("parse error in goal `{a}`"))?);
        }
    }
    Ok(out)
}
