//! Canonical texts for configurations and answers.
//!
//! Two configurations are `≡_V`-equivalent exactly when their canonical
//! texts coincide: pending built-ins are conjoined to the built-in store,
//! the solved form is applied to the atoms, the store is projected onto
//! `V` and the atoms' variables, variables outside `V` and identifiers are
//! renamed canonically, the token store is cleaned, and all failed
//! configurations collapse to one text.

use std::collections::BTreeSet;

use crate::builtins::{Builtin, BuiltinStore};
use crate::canon::{lit, push_term, CanonText, Canonicalizer, Item, Tok};
use crate::engine::{ConfigT, ConfigTPrime};
use crate::syntax::{GoalItem, IdAtom, TokenStore};
use crate::term::{Atom, Term, Var};

pub(crate) const SEC_GOAL: u8 = 5;
pub(crate) const SEC_ATOM: u8 = 10;
pub(crate) const SEC_TOKEN: u8 = 30;

pub const FAILED: &str = "FAILED";

fn atom_toks(a: &Atom) -> Vec<Tok> {
    let mut t = Vec::new();
    push_term(&mut t, &a.to_term());
    t
}

fn render(text: &CanonText) -> String {
    let mut out = String::new();
    for (sec, items) in &text.sections {
        let tag = match *sec {
            SEC_GOAL => "G",
            SEC_ATOM => "S",
            SEC_TOKEN => "T",
            _ => "C",
        };
        out.push_str(tag);
        out.push('{');
        out.push_str(&items.join(", "));
        out.push_str("} ");
    }
    out.pop();
    out
}

fn key_parts(
    goal_atoms: &[Atom],
    pending: &[&Builtin],
    atoms: &[IdAtom],
    c: &BuiltinStore,
    tokens: &TokenStore,
    v: &BTreeSet<Var>,
) -> String {
    let mut store = c.clone();
    store.add_all(pending.iter().copied());
    if !store.satisfiable() {
        return FAILED.to_string();
    }
    let terms: Vec<Term> = goal_atoms.iter().chain(atoms.iter().map(|a| &a.atom)).map(Atom::to_term).collect();
    let Ok(proj) = store.project_terms(v, &terms) else {
        return FAILED.to_string();
    };
    let mut items = Vec::new();
    let (g, s) = proj.terms.split_at(goal_atoms.len());
    for t in g {
        let mut toks = Vec::new();
        push_term(&mut toks, t);
        items.push(Item::new(SEC_GOAL, toks));
    }
    for (t, a) in s.iter().zip(atoms) {
        let mut toks = Vec::new();
        push_term(&mut toks, t);
        lit(&mut toks, "#");
        toks.push(Tok::Id(a.id));
        items.push(Item::new(SEC_ATOM, toks));
    }
    items.extend(proj.builtin_items());
    let ids: BTreeSet<u32> = atoms.iter().map(|a| a.id).collect();
    for t in crate::syntax::clean(&ids, tokens) {
        let mut toks = Vec::new();
        lit(&mut toks, &format!("{}@", t.rule));
        for (i, id) in t.ids.iter().enumerate() {
            if i > 0 {
                lit(&mut toks, ",");
            }
            toks.push(Tok::Id(*id));
        }
        items.push(Item::new(SEC_TOKEN, toks));
    }
    render(&Canonicalizer::new(v, true).run(&[], &items))
}

/// Canonical `≡_V` text of a plain-semantics configuration.
pub fn key_t(c: &ConfigT, v: &BTreeSet<Var>) -> String {
    let mut goal_atoms = Vec::new();
    let mut pending = Vec::new();
    for g in &c.goal {
        match g {
            GoalItem::Chr(a) => goal_atoms.push(a.clone()),
            GoalItem::Builtin(b) => pending.push(b),
        }
    }
    key_parts(&goal_atoms, &pending, &c.store, &c.builtins, &c.tokens, v)
}

/// Canonical `≡_V` text of an annotated-semantics configuration.
pub fn key_tprime(c: &ConfigTPrime, v: &BTreeSet<Var>) -> String {
    let pending: Vec<&Builtin> = c.pending.iter().collect();
    key_parts(&[], &pending, &c.atoms, &c.builtins, &c.tokens, v)
}

/// `∃_{-V}(chr(K) ∧ D)` as canonical text; `FAILED` for inconsistent `D`.
pub fn answer(atoms: &[Atom], c: &BuiltinStore, v: &BTreeSet<Var>) -> String {
    let terms: Vec<Term> = atoms.iter().map(Atom::to_term).collect();
    let Ok(proj) = c.project_terms(v, &terms) else {
        return FAILED.to_string();
    };
    let extra: Vec<Item> = proj
        .terms
        .iter()
        .map(|t| match Atom::from_term(t.clone()) {
            Some(a) => Item::new(SEC_ATOM, atom_toks(&a)),
            None => Item::new(SEC_ATOM, crate::canon::term_toks(t)),
        })
        .collect();
    proj.render(v, &extra)
}
