//! The two transition systems and a bounded explorer over their derivations.

mod annotated;
mod explore;
mod plain;
mod subject;

use std::collections::BTreeSet;
use std::fmt;

pub use annotated::{AnnotatedSystem, ConfigTPrime};
pub use explore::{
    explore, min_apply_steps, qualified_answers, Answers, BoundKind, Exploration, Final, Lasso,
};
pub use plain::{ConfigT, PlainSystem};
pub use subject::{Outline, Subject, Visitor};

use crate::builtins::{Builtin, BuiltinStore};
use crate::syntax::{BodyItem, IdAtom, Program, Rule, Token, TokenStore};
use crate::term::{sym, Subst, Term, Var};

/// Which transitions are explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Strategy {
    /// Pending built-ins are solved first (left to right); Apply only fires
    /// on built-in free configurations.
    Normal,
    /// Every interleaving of Solve / Introduce / Apply.
    All,
    /// Normal, plus the option of setting the first pending built-in aside
    /// forever instead of solving it.
    Deferring,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Options {
    pub strategy: Strategy,
    pub max_depth: usize,
    pub max_counter: u32,
    /// Cap on the number of distinct expanded configurations.
    pub max_states: usize,
    /// Cap on the total size (atoms and built-ins) of configurations kept
    /// for later exploration; deep non-terminating searches hit this
    /// before exhausting memory.
    pub max_retained: usize,
    pub explore_all_apply_choices: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            strategy: Strategy::Normal,
            max_depth: 10_000,
            max_counter: 100_000,
            max_states: 200_000,
            max_retained: 4_000_000,
            explore_all_apply_choices: true,
        }
    }
}

impl Options {
    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn with_max_depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum StepKind {
    Solve,
    Introduce,
    Apply,
    Park,
}

/// What a single transition did; enough to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct StepLabel {
    pub kind: StepKind,
    /// Position of the consumed goal/store element (Solve, Introduce, Park).
    pub pos: usize,
    /// Rule index and name (Apply).
    pub rule: Option<(usize, String)>,
    /// Identifiers matched by the head, kept part first (Apply).
    pub ids: Vec<u32>,
    /// Counter after the step.
    pub counter: u32,
    /// Printed form of the consumed element (Solve, Introduce, Park).
    pub detail: String,
    /// True for the annotated transition system.
    pub primed: bool,
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.primed { "'" } else { "" };
        match self.kind {
            StepKind::Solve => write!(f, "Solve{p} {} n={}", self.detail, self.counter),
            StepKind::Introduce => write!(f, "Introduce {} n={}", self.detail, self.counter),
            StepKind::Park => write!(f, "Park {} n={}", self.detail, self.counter),
            StepKind::Apply => {
                let ids: Vec<String> = self.ids.iter().map(u32::to_string).collect();
                let name = self.rule.as_ref().map(|r| r.1.as_str()).unwrap_or("?");
                write!(f, "Apply{p} {name} [{}] n={}", ids.join(","), self.counter)
            }
        }
    }
}

/// A transition system over configurations of type `Config`.
pub trait System {
    type Config: Clone + fmt::Display;

    fn successors(&self, c: &Self::Config, opts: &Options) -> Vec<(StepLabel, Self::Config)>;
    fn is_failed(&self, c: &Self::Config) -> bool;
    /// Canonical text deciding `≡_V`.
    fn key(&self, c: &Self::Config, protected: &BTreeSet<Var>) -> String;
    fn counter(&self, c: &Self::Config) -> u32;
    /// Rough size of a configuration, for memory accounting.
    fn size(&self, c: &Self::Config) -> usize;
    /// Number of built-ins not yet solved (or parked).
    fn pending(&self, c: &Self::Config) -> usize;
    /// Identity of a search node: the `≡_V` text plus the number of pending
    /// built-ins.  Solving does not change the `≡_V` class, so without the
    /// count every Solve step would look like a cycle.
    fn node_id(&self, c: &Self::Config, protected: &BTreeSet<Var>) -> String {
        format!("{}\u{1}{}", self.key(c, protected), self.pending(c))
    }
    /// `∃_{-V}(chr(K) ∧ D)` in canonical text, for a non-failed configuration.
    fn answer(&self, c: &Self::Config, goal_vars: &BTreeSet<Var>) -> String;
}

/// `inst(B, T, n)`: shifts every identifier by `n`; the third component is
/// the greatest identifier of the result, or `n` when there is none.
pub fn inst(body: &[BodyItem], tokens: &TokenStore, n: u32) -> (Vec<BodyItem>, TokenStore, u32) {
    let mut m = n;
    let body = body
        .iter()
        .map(|b| match b {
            BodyItem::Chr(a, Some(i)) => {
                m = m.max(i + n);
                BodyItem::Chr(a.clone(), Some(i + n))
            }
            other => other.clone(),
        })
        .collect();
    let tokens = tokens
        .iter()
        .map(|t| {
            let ids: Vec<u32> = t.ids.iter().map(|i| i + n).collect();
            m = ids.iter().copied().fold(m, u32::max);
            Token { rule: t.rule.clone(), ids }
        })
        .collect();
    (body, tokens, m)
}

/// Renames every variable of `rule` to a variant carrying `tag`; distinct
/// variables stay distinct because their names are kept.
pub(crate) fn rename_for_step(rule: &Rule, tag: u32) -> Rule {
    let bindings = rule.vars().into_iter().map(|v| {
        let name = if v.tag == 0 { v.name.clone() } else { sym(&format!("{}_{}", v.name, v.tag)) };
        (v, Term::Var(Var::tagged(name, tag)))
    });
    rule.apply_subst(&Subst::from_bindings(bindings.collect::<Vec<_>>()))
}

/// A possible rule application.
pub(crate) struct Firing {
    pub rule: usize,
    pub renamed: Rule,
    /// Store positions matched, kept heads first.
    pub positions: Vec<usize>,
    pub ids: Vec<u32>,
    /// `store atom = head atom`, argumentwise.
    pub eqs: Vec<Builtin>,
}

/// All Apply candidates on a store, in rule order and then in
/// lexicographic order of matched positions.
pub(crate) fn firings(
    program: &Program,
    atoms: &[IdAtom],
    c: &BuiltinStore,
    tokens: &TokenStore,
    tag: u32,
) -> Vec<Firing> {
    let mut out = Vec::new();
    for (ri, rule) in program.rules.iter().enumerate() {
        let heads: Vec<_> = rule.heads().collect();
        // Cheap signature filter before renaming.
        if heads.iter().any(|h| !atoms.iter().any(|a| a.atom.same_signature(h))) {
            continue;
        }
        let renamed = rename_for_step(rule, tag);
        let quantified = renamed.vars();
        let rheads: Vec<_> = renamed.heads().cloned().collect();
        let mut positions = Vec::new();
        let mut eqs = Vec::new();
        search(atoms, c, tokens, &renamed, &rheads, &quantified, &mut positions, &mut eqs, &mut |pos, eqs| {
            out.push(Firing {
                rule: ri,
                renamed: renamed.clone(),
                positions: pos.to_vec(),
                ids: pos.iter().map(|&p| atoms[p].id).collect(),
                eqs: eqs.to_vec(),
            })
        });
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    atoms: &[IdAtom],
    c: &BuiltinStore,
    tokens: &TokenStore,
    rule: &Rule,
    heads: &[crate::term::Atom],
    quantified: &BTreeSet<Var>,
    positions: &mut Vec<usize>,
    eqs: &mut Vec<Builtin>,
    emit: &mut dyn FnMut(&[usize], &[Builtin]),
) {
    let k = positions.len();
    if k == heads.len() {
        let ids: Vec<u32> = positions.iter().map(|&p| atoms[p].id).collect();
        if tokens.contains(&Token { rule: rule.name.clone(), ids }) {
            return;
        }
        let mut all = eqs.clone();
        all.extend(rule.guard.iter().cloned());
        if c.entails(quantified, &all) {
            emit(positions, eqs);
        }
        return;
    }
    let h = &heads[k];
    for (p, a) in atoms.iter().enumerate() {
        if positions.contains(&p) || !a.atom.same_signature(h) {
            continue;
        }
        let before = eqs.len();
        eqs.extend(a.atom.args.iter().zip(&h.args).map(|(s, t)| Builtin::Eq(s.clone(), t.clone())));
        if c.entails(quantified, eqs) {
            positions.push(p);
            search(atoms, c, tokens, rule, heads, quantified, positions, eqs, emit);
            positions.pop();
        }
        eqs.truncate(before);
    }
}

/// A recorded derivation.
#[derive(Clone, Debug)]
pub struct Derivation<C> {
    pub initial: C,
    pub steps: Vec<(StepLabel, C)>,
}

impl<C> Derivation<C> {
    pub fn last(&self) -> &C {
        self.steps.last().map(|s| &s.1).unwrap_or(&self.initial)
    }

    pub fn labels(&self) -> Vec<StepLabel> {
        self.steps.iter().map(|s| s.0.clone()).collect()
    }
}

/// Number of Apply / Apply′ transitions.
pub fn count_apply_steps<C>(d: &Derivation<C>) -> usize {
    d.steps.iter().filter(|(l, _)| l.kind == StepKind::Apply).count()
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("step {index} (`{label}`) is not a transition of the configuration it follows")]
pub struct ReplayError {
    pub index: usize,
    pub label: String,
}

/// Re-executes a sequence of step labels from `initial`.
pub fn replay<S: System>(
    sys: &S,
    initial: S::Config,
    labels: &[StepLabel],
    opts: &Options,
) -> Result<Derivation<S::Config>, ReplayError> {
    let mut d = Derivation { initial, steps: Vec::new() };
    // Replay must accept any recorded step, whatever strategy produced it.
    let variants: Vec<Options> = [opts.strategy, Strategy::All, Strategy::Deferring]
        .into_iter()
        .map(|s| Options { strategy: s, explore_all_apply_choices: true, ..opts.clone() })
        .collect();
    for (i, l) in labels.iter().enumerate() {
        let cur = d.last().clone();
        let next = variants
            .iter()
            .find_map(|o| sys.successors(&cur, o).into_iter().find(|(l2, _)| l2 == l))
            .ok_or_else(|| ReplayError { index: i, label: l.to_string() })?;
        d.steps.push(next);
    }
    Ok(d)
}

pub(crate) fn join<T: fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn fmt_store(c: &BuiltinStore) -> String {
    let atoms = c.to_atoms();
    if atoms.is_empty() {
        "true".to_string()
    } else {
        join(atoms)
    }
}
