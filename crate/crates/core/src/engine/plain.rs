//! Transition system for plain programs: `⟨G,S,C,T⟩_n`.

use std::collections::BTreeSet;
use std::fmt;

use super::{firings, fmt_store, join, Options, StepKind, StepLabel, Strategy, System};
use crate::analysis::canonical;
use crate::builtins::{Builtin, BuiltinStore};
use crate::syntax::{fmt_tokens, BodyItem, Goal, GoalItem, IdAtom, Program, Token, TokenStore};
use crate::term::Var;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigT {
    pub goal: Vec<GoalItem>,
    pub store: Vec<IdAtom>,
    pub builtins: BuiltinStore,
    pub tokens: TokenStore,
    /// Next identifier to hand out.
    pub counter: u32,
    /// Built-ins set aside by the deferring strategy; never solved.
    pub parked: Vec<Builtin>,
    /// Tag for the next rule renaming (not part of the configuration proper).
    pub next_tag: u32,
}

impl ConfigT {
    /// `⟨G, ∅, true, ∅⟩_1`.
    pub fn initial(goal: &Goal) -> Self {
        ConfigT {
            goal: goal.items.clone(),
            store: Vec::new(),
            builtins: BuiltinStore::new(),
            tokens: TokenStore::new(),
            counter: 1,
            parked: Vec::new(),
            next_tag: 1,
        }
    }

    pub fn is_builtin_free(&self) -> bool {
        !self.goal.iter().any(|g| matches!(g, GoalItem::Builtin(_)))
    }
}

impl fmt::Display for ConfigT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = if self.goal.is_empty() { "∅".to_string() } else { join(&self.goal) };
        let s = if self.store.is_empty() { "∅".to_string() } else { join(&self.store) };
        write!(f, "⟨({g}), ({s}), {}, {}⟩_{}", fmt_store(&self.builtins), fmt_tokens(&self.tokens), self.counter)?;
        if !self.parked.is_empty() {
            write!(f, " parked: {}", join(&self.parked))?;
        }
        Ok(())
    }
}

pub struct PlainSystem<'a> {
    pub program: &'a Program,
}

impl<'a> PlainSystem<'a> {
    pub fn new(program: &'a Program) -> Self {
        PlainSystem { program }
    }

    fn solve(&self, c: &ConfigT, i: usize, b: &Builtin) -> (StepLabel, ConfigT) {
        let mut n = c.clone();
        n.goal.remove(i);
        n.builtins.add_mut(b);
        let l = StepLabel {
            kind: StepKind::Solve,
            pos: i,
            rule: None,
            ids: vec![],
            counter: n.counter,
            detail: b.to_string(),
            primed: false,
        };
        (l, n)
    }

    fn park(&self, c: &ConfigT, i: usize, b: &Builtin) -> (StepLabel, ConfigT) {
        let mut n = c.clone();
        n.goal.remove(i);
        n.parked.push(b.clone());
        let l = StepLabel {
            kind: StepKind::Park,
            pos: i,
            rule: None,
            ids: vec![],
            counter: n.counter,
            detail: b.to_string(),
            primed: false,
        };
        (l, n)
    }
}

impl System for PlainSystem<'_> {
    type Config = ConfigT;

    fn successors(&self, c: &ConfigT, opts: &Options) -> Vec<(StepLabel, ConfigT)> {
        if c.builtins.is_inconsistent() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let first_builtin = c.goal.iter().enumerate().find_map(|(i, g)| match g {
            GoalItem::Builtin(b) => Some((i, b)),
            GoalItem::Chr(_) => None,
        });
        if let Some((i, b)) = first_builtin {
            out.push(self.solve(c, i, b));
            match opts.strategy {
                Strategy::Normal => return out,
                Strategy::Deferring => {
                    out.push(self.park(c, i, b));
                    return out;
                }
                Strategy::All => {}
            }
        }
        // Introduce: one successor per syntactically distinct atom.
        let mut seen = BTreeSet::new();
        for (i, g) in c.goal.iter().enumerate() {
            if let GoalItem::Chr(a) = g {
                if !seen.insert(a) {
                    continue;
                }
                let mut n = c.clone();
                n.goal.remove(i);
                let ia = IdAtom { atom: a.clone(), id: c.counter };
                n.store.push(ia.clone());
                n.counter += 1;
                let l = StepLabel {
                    kind: StepKind::Introduce,
                    pos: i,
                    rule: None,
                    ids: vec![],
                    counter: n.counter,
                    detail: ia.to_string(),
                    primed: false,
                };
                out.push((l, n));
            }
        }
        for f in firings(self.program, &c.store, &c.builtins, &c.tokens, c.next_tag) {
            let r = &f.renamed;
            let mut n = c.clone();
            n.next_tag += 1;
            let removed: BTreeSet<usize> = f.positions[r.kept.len()..].iter().copied().collect();
            n.store = c.store.iter().enumerate().filter(|(p, _)| !removed.contains(p)).map(|(_, a)| a.clone()).collect();
            n.builtins.add_all(&f.eqs);
            n.builtins.add_all(&r.guard);
            n.tokens.insert(Token { rule: r.name.clone(), ids: f.ids.clone() });
            let body: Vec<GoalItem> = r
                .body
                .iter()
                .map(|b| match b {
                    BodyItem::Chr(a, _) => GoalItem::Chr(a.clone()),
                    BodyItem::Builtin(b) => GoalItem::Builtin(b.clone()),
                })
                .collect();
            n.goal = body.into_iter().chain(c.goal.iter().cloned()).collect();
            let l = StepLabel {
                kind: StepKind::Apply,
                pos: 0,
                rule: Some((f.rule, r.name.to_string())),
                ids: f.ids,
                counter: n.counter,
                detail: String::new(),
                primed: false,
            };
            out.push((l, n));
        }
        if !opts.explore_all_apply_choices {
            out.truncate(1);
        }
        out
    }

    fn is_failed(&self, c: &ConfigT) -> bool {
        c.builtins.is_inconsistent()
    }

    fn key(&self, c: &ConfigT, protected: &BTreeSet<Var>) -> String {
        canonical::key_t(c, protected)
    }

    fn counter(&self, c: &ConfigT) -> u32 {
        c.counter
    }

    fn size(&self, c: &ConfigT) -> usize {
        1 + c.goal.len() + c.store.len() + c.tokens.len() + c.builtins.solved().len() + c.builtins.diseqs().len()
    }

    fn pending(&self, c: &ConfigT) -> usize {
        c.goal.iter().filter(|g| matches!(g, GoalItem::Builtin(_))).count()
    }

    fn answer(&self, c: &ConfigT, goal_vars: &BTreeSet<Var>) -> String {
        let atoms: Vec<_> = c.store.iter().map(|a| a.atom.clone()).collect();
        canonical::answer(&atoms, &c.builtins, goal_vars)
    }
}
