//! Transition system for annotated programs: `⟨S,C,T⟩_n`.

use std::collections::BTreeSet;
use std::fmt;

use super::{firings, fmt_store, inst, join, Options, StepKind, StepLabel, Strategy, System};
use crate::analysis::canonical;
use crate::builtins::{Builtin, BuiltinStore};
use crate::syntax::{fmt_tokens, identify, BodyItem, Goal, IdAtom, IdGoalItem, Program, Token, TokenStore};
use crate::term::Var;

/// The first component is split into identified atoms and pending
/// built-ins (kept in arrival order).
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigTPrime {
    pub atoms: Vec<IdAtom>,
    pub pending: Vec<Builtin>,
    pub builtins: BuiltinStore,
    pub tokens: TokenStore,
    /// Last identifier used.
    pub counter: u32,
    pub parked: Vec<Builtin>,
    pub next_tag: u32,
}

impl ConfigTPrime {
    /// `⟨I(G), true, ∅⟩_m`.
    pub fn initial(goal: &Goal) -> Self {
        let mut atoms = Vec::new();
        let mut pending = Vec::new();
        for it in identify(goal) {
            match it {
                IdGoalItem::Chr(a) => atoms.push(a),
                IdGoalItem::Builtin(b) => pending.push(b),
            }
        }
        let counter = atoms.len() as u32;
        ConfigTPrime {
            atoms,
            pending,
            builtins: BuiltinStore::new(),
            tokens: TokenStore::new(),
            counter,
            parked: Vec::new(),
            next_tag: 1,
        }
    }

    pub fn is_builtin_free(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<u32> {
        self.atoms.iter().map(|a| a.id).collect()
    }
}

impl fmt::Display for ConfigTPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.pending.iter().map(ToString::to_string).collect();
        parts.extend(self.atoms.iter().map(ToString::to_string));
        let s = if parts.is_empty() { "∅".to_string() } else { parts.join(", ") };
        write!(f, "⟨({s}), {}, {}⟩_{}", fmt_store(&self.builtins), fmt_tokens(&self.tokens), self.counter)?;
        if !self.parked.is_empty() {
            write!(f, " parked: {}", join(&self.parked))?;
        }
        Ok(())
    }
}

pub struct AnnotatedSystem<'a> {
    pub program: &'a Program,
}

impl<'a> AnnotatedSystem<'a> {
    /// `program` must be annotated (see [`crate::syntax::annotate`]).
    pub fn new(program: &'a Program) -> Self {
        AnnotatedSystem { program }
    }

    fn label(kind: StepKind, pos: usize, counter: u32, detail: String) -> StepLabel {
        StepLabel { kind, pos, rule: None, ids: vec![], counter, detail, primed: true }
    }
}

impl System for AnnotatedSystem<'_> {
    type Config = ConfigTPrime;

    fn successors(&self, c: &ConfigTPrime, opts: &Options) -> Vec<(StepLabel, ConfigTPrime)> {
        if c.builtins.is_inconsistent() {
            return Vec::new();
        }
        let mut out = Vec::new();
        if let Some(b) = c.pending.first() {
            let mut n = c.clone();
            n.pending.remove(0);
            n.builtins.add_mut(b);
            out.push((Self::label(StepKind::Solve, 0, n.counter, b.to_string()), n));
            match opts.strategy {
                Strategy::Normal => return out,
                Strategy::Deferring => {
                    let mut n = c.clone();
                    let b = n.pending.remove(0);
                    n.parked.push(b.clone());
                    out.push((Self::label(StepKind::Park, 0, n.counter, b.to_string()), n));
                    return out;
                }
                Strategy::All => {}
            }
        }
        for f in firings(self.program, &c.atoms, &c.builtins, &c.tokens, c.next_tag) {
            let r = &f.renamed;
            let (b1, t1, m) = inst(&r.body, &r.tokens, c.counter);
            let mut n = c.clone();
            n.next_tag += 1;
            let removed: BTreeSet<usize> = f.positions[r.kept.len()..].iter().copied().collect();
            n.atoms = c.atoms.iter().enumerate().filter(|(p, _)| !removed.contains(p)).map(|(_, a)| a.clone()).collect();
            for item in b1 {
                match item {
                    BodyItem::Chr(a, Some(id)) => n.atoms.push(IdAtom { atom: a, id }),
                    BodyItem::Chr(a, None) => unreachable!("unannotated body atom {a} in annotated program"),
                    BodyItem::Builtin(b) => n.pending.push(b),
                }
            }
            n.builtins.add_all(&f.eqs);
            n.builtins.add_all(&r.guard);
            n.tokens.insert(Token { rule: r.name.clone(), ids: f.ids.clone() });
            n.tokens.extend(t1);
            n.counter = m;
            let l = StepLabel {
                kind: StepKind::Apply,
                pos: 0,
                rule: Some((f.rule, r.name.to_string())),
                ids: f.ids,
                counter: n.counter,
                detail: String::new(),
                primed: true,
            };
            out.push((l, n));
        }
        if !opts.explore_all_apply_choices {
            out.truncate(1);
        }
        out
    }

    fn is_failed(&self, c: &ConfigTPrime) -> bool {
        c.builtins.is_inconsistent()
    }

    fn key(&self, c: &ConfigTPrime, protected: &BTreeSet<Var>) -> String {
        canonical::key_tprime(c, protected)
    }

    fn counter(&self, c: &ConfigTPrime) -> u32 {
        c.counter
    }

    fn size(&self, c: &ConfigTPrime) -> usize {
        1 + c.pending.len() + c.atoms.len() + c.tokens.len() + c.builtins.solved().len() + c.builtins.diseqs().len()
    }

    fn pending(&self, c: &ConfigTPrime) -> usize {
        c.pending.len()
    }

    fn answer(&self, c: &ConfigTPrime, goal_vars: &BTreeSet<Var>) -> String {
        let atoms: Vec<_> = c.atoms.iter().map(|a| a.atom.clone()).collect();
        canonical::answer(&atoms, &c.builtins, goal_vars)
    }
}
