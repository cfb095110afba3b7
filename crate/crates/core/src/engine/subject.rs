use std::collections::BTreeSet;

use super::{
    explore, min_apply_steps, qualified_answers, AnnotatedSystem, Answers, ConfigT, ConfigTPrime, Exploration,
    Options, PlainSystem, StepLabel, System,
};
use crate::syntax::{annotate, Goal, Program, Semantics};
use crate::term::Var;

/// A program together with the transition system it runs under.
#[derive(Clone, Debug)]
pub struct Subject {
    pub program: Program,
    pub semantics: Semantics,
}

/// Something to do with a concrete system and its initial configuration.
pub trait Visitor {
    type Out;
    fn visit<S: System>(self, sys: &S, init: S::Config) -> Self::Out;
}

/// Exploration summary independent of the configuration type.
#[derive(Clone, Debug)]
pub struct Outline {
    pub final_keys: Vec<String>,
    pub final_paths: Vec<Vec<StepLabel>>,
    pub final_configs: Vec<String>,
    pub failed: usize,
    pub failed_path: Option<Vec<StepLabel>>,
    pub lasso: Option<super::Lasso>,
    pub bound_hit: Option<super::BoundKind>,
    pub states: usize,
}

impl<C: std::fmt::Display> From<Exploration<C>> for Outline {
    fn from(ex: Exploration<C>) -> Self {
        Outline {
            final_keys: ex.finals.iter().map(|f| f.key.clone()).collect(),
            final_paths: ex.finals.iter().map(|f| f.path.clone()).collect(),
            final_configs: ex.finals.iter().map(|f| f.config.to_string()).collect(),
            failed: ex.failed,
            failed_path: ex.failed_path,
            lasso: ex.lasso,
            bound_hit: ex.bound_hit,
            states: ex.states,
        }
    }
}

impl Subject {
    /// Annotated semantics annotates the program first when needed.
    pub fn new(program: Program, semantics: Semantics) -> Self {
        let program = match semantics {
            Semantics::Annotated if !program.is_annotated() => annotate(&program),
            _ => program,
        };
        Subject { program, semantics }
    }

    pub fn plain(program: Program) -> Self {
        Self::new(program, Semantics::Plain)
    }

    pub fn annotated(program: Program) -> Self {
        Self::new(program, Semantics::Annotated)
    }

    pub fn with<V: Visitor>(&self, goal: &Goal, v: V) -> V::Out {
        match self.semantics {
            Semantics::Plain => v.visit(&PlainSystem::new(&self.program), ConfigT::initial(goal)),
            Semantics::Annotated => v.visit(&AnnotatedSystem::new(&self.program), ConfigTPrime::initial(goal)),
        }
    }

    pub fn answers(&self, goal: &Goal, opts: &Options) -> Answers {
        struct Qa<'a>(&'a BTreeSet<Var>, &'a Options);
        impl Visitor for Qa<'_> {
            type Out = Answers;
            fn visit<S: System>(self, sys: &S, init: S::Config) -> Answers {
                qualified_answers(sys, init, self.0, self.1)
            }
        }
        self.with(goal, Qa(&goal.vars(), opts))
    }

    pub fn outline(&self, goal: &Goal, opts: &Options, stop_on_lasso: bool) -> Outline {
        struct Ex<'a>(&'a BTreeSet<Var>, &'a Options, bool);
        impl Visitor for Ex<'_> {
            type Out = Outline;
            fn visit<S: System>(self, sys: &S, init: S::Config) -> Outline {
                explore(sys, init, self.0, self.1, self.2).into()
            }
        }
        self.with(goal, Ex(&goal.vars(), opts, stop_on_lasso))
    }

    pub fn min_apply_steps(&self, goal: &Goal, opts: &Options) -> Option<(usize, Vec<StepLabel>)> {
        struct M<'a>(&'a BTreeSet<Var>, &'a Options);
        impl Visitor for M<'_> {
            type Out = Option<(usize, Vec<StepLabel>)>;
            fn visit<S: System>(self, sys: &S, init: S::Config) -> Self::Out {
                min_apply_steps(sys, init, self.0, self.1)
            }
        }
        self.with(goal, M(&goal.vars(), opts))
    }

    /// Replays `labels` and renders each configuration, initial one first.
    pub fn trace(&self, goal: &Goal, labels: &[StepLabel], opts: &Options) -> Result<Vec<String>, super::ReplayError> {
        struct T<'a>(&'a [StepLabel], &'a Options);
        impl Visitor for T<'_> {
            type Out = Result<Vec<String>, super::ReplayError>;
            fn visit<S: System>(self, sys: &S, init: S::Config) -> Self::Out {
                let d = super::replay(sys, init, self.0, self.1)?;
                let mut out = vec![d.initial.to_string()];
                out.extend(d.steps.iter().map(|(l, c)| format!("{l}  →  {c}")));
                Ok(out)
            }
        }
        self.with(goal, T(labels, opts))
    }
}
