//! `chru`: run, annotate, unfold, transform and check CHR programs.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chru_core::engine::{Options, Strategy};

/// Exit statuses shared by all subcommands.
pub mod exit {
    pub const OK: u8 = 0;
    pub const PARSE: u8 = 1;
    pub const BOUND: u8 = 2;
    pub const VIOLATION: u8 = 3;
    pub const COUNTER_EXAMPLE: u8 = 4;
    pub const UNKNOWN: u8 = 5;
}

#[derive(Parser, Debug)]
#[command(name = "chru", version, about = "CHR engine, unfolding transformer and bounded checkers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the qualified answers of goals.
    Run {
        program: PathBuf,
        /// Goals, or files with one goal per line.
        inputs: Vec<String>,
        /// Replay the derivations of a witness (JSON from `check`, or a list of steps).
        #[arg(long)]
        replay: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the annotated version of a program.
    Annotate {
        program: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Unfold one rule with another.
    Unfold {
        program: PathBuf,
        /// Rule to unfold (name, 1-based index or `#index`).
        rule: String,
        /// Rule used for the unfolding.
        with: String,
        /// Body identifiers to match, comma separated; every selection when omitted.
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<u32>>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a replacement script, writing every intermediate program.
    Transform {
        program: PathBuf,
        script: PathBuf,
        /// Directory for the `.achr` files and the JSON report.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Apply replacements whose condition fails (still reported).
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a bounded property check.
    Check {
        #[arg(value_enum)]
        check: CheckKind,
        /// Program files, goals and goal files.
        inputs: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the qualified answers of two programs.
    Diff {
        left: PathBuf,
        right: PathBuf,
        /// Goals, or files with one goal per line.
        inputs: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    QaEqual,
    NormalTermination,
    Confluence,
    Divergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Normal,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Plain,
    Annotated,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Maximum derivation length.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    bound_depth: u64,
    /// Maximum identifier counter.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u32).range(1..))]
    bound_counter: u32,
    #[arg(long, value_enum, default_value_t = StrategyArg::Normal)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print the step log of every derivation reported.
    #[arg(long)]
    trace: bool,
    /// Exit with status 2 when a bound is exhausted.
    #[arg(long)]
    strict: bool,
    /// Report elapsed time.
    #[arg(long)]
    timing: bool,
    /// Override the semantics implied by the file extension.
    #[arg(long, value_enum)]
    semantics: Option<SemanticsArg>,
}

impl Common {
    pub fn options(&self) -> Options {
        let strategy = match self.strategy {
            StrategyArg::Normal => Strategy::Normal,
            StrategyArg::All => Strategy::All,
        };
        Options {
            strategy,
            max_depth: self.bound_depth as usize,
            max_counter: self.bound_counter,
            ..Options::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { program, inputs, replay, common } => commands::run(&program, &inputs, replay.as_deref(), &common),
        Command::Annotate { program, output } => commands::annotate(&program, output.as_deref()),
        Command::Unfold { program, rule, with, ids, format } => {
            commands::unfold(&program, &rule, &with, ids.as_deref(), format)
        }
        Command::Transform { program, script, out_dir, force, format } => {
            commands::transform(&program, &script, &out_dir, force, format)
        }
        Command::Check { check, inputs, common } => commands::check(check, &inputs, &common),
        Command::Diff { left, right, inputs, common } => commands::diff(&left, &right, &inputs, &common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::PARSE)
        }
    }
}
