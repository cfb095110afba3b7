//! A normal form for rules, used to compare unfolding results and to drop
//! duplicates.
//!
//! Equalities are decomposed, trivial ones dropped and oriented, and body
//! built-ins already entailed by the guard are removed.  Variables and
//! identifiers are renamed canonically; head atoms keep their order, while
//! guard, body atoms, body built-ins and tokens are compared as multisets.

use std::collections::BTreeSet;

use crate::builtins::{Builtin, BuiltinStore};
use crate::canon::{lit, push_term, Canonicalizer, Item, Tok};
use crate::syntax::{BodyItem, Rule};
use crate::term::Term;

fn decompose(l: &Term, r: &Term, out: &mut Vec<Builtin>) {
    if l == r {
        return;
    }
    match (l, r) {
        (Term::App(f, a), Term::App(g, b)) if f == g && a.len() == b.len() && !a.is_empty() => {
            a.iter().zip(b).for_each(|(x, y)| decompose(x, y, out));
        }
        (l, r) if r.is_var() && !l.is_var() => out.push(Builtin::Eq(r.clone(), l.clone())),
        _ => out.push(Builtin::Eq(l.clone(), r.clone())),
    }
}

/// Decomposed, oriented and de-duplicated built-ins.
pub fn normalize_builtins<'a>(bs: impl IntoIterator<Item = &'a Builtin>) -> Vec<Builtin> {
    let mut raw = Vec::new();
    for b in bs {
        match b {
            Builtin::True => {}
            Builtin::Eq(l, r) => decompose(l, r, &mut raw),
            other => raw.push(other.clone()),
        }
    }
    let mut out: Vec<Builtin> = Vec::new();
    for b in raw {
        let dup = out.iter().any(|o| {
            *o == b
                || matches!((o, &b), (Builtin::Eq(a, c), Builtin::Eq(x, y)) | (Builtin::Neq(a, c), Builtin::Neq(x, y))
                    if a == y && c == x)
        });
        if !dup {
            out.push(b);
        }
    }
    out
}

const SEC_NAME: u8 = 0;
const SEC_KEPT: u8 = 1;
const SEC_REMOVED: u8 = 2;
const SEC_GUARD: u8 = 3;
const SEC_BODY: u8 = 4;
const SEC_BODY_BUILTIN: u8 = 5;
const SEC_TOKEN: u8 = 6;

/// Canonical text of `r`; equal texts mean the rules are variants.
pub fn canonical_rule(r: &Rule) -> String {
    let guard = normalize_builtins(&r.guard);
    let gstore = BuiltinStore::from_atoms(&guard);
    let none = BTreeSet::new();
    let body_b: Vec<Builtin> = normalize_builtins(r.body_builtins())
        .into_iter()
        .filter(|b| !gstore.entails(&none, std::slice::from_ref(b)))
        .collect();

    let mut prefix = vec![Item::new(SEC_NAME, vec![Tok::Lit(r.name.to_string())])];
    for (sec, atoms) in [(SEC_KEPT, &r.kept), (SEC_REMOVED, &r.removed)] {
        for a in atoms {
            let mut t = Vec::new();
            push_term(&mut t, &a.to_term());
            prefix.push(Item::new(sec, t));
        }
    }
    let mut items: Vec<Item> = guard.iter().map(|b| b.item(SEC_GUARD)).collect();
    for item in &r.body {
        if let BodyItem::Chr(a, id) = item {
            let mut t = Vec::new();
            push_term(&mut t, &a.to_term());
            if let Some(i) = id {
                lit(&mut t, "#");
                t.push(Tok::Id(*i));
            }
            items.push(Item::new(SEC_BODY, t));
        }
    }
    items.extend(body_b.iter().map(|b| b.item(SEC_BODY_BUILTIN)));
    for tok in &r.tokens {
        let mut t = Vec::new();
        lit(&mut t, &format!("{}@", tok.rule));
        for (i, id) in tok.ids.iter().enumerate() {
            if i > 0 {
                lit(&mut t, ",");
            }
            t.push(Tok::Id(*id));
        }
        items.push(Item::new(SEC_TOKEN, t));
    }
    let text = Canonicalizer::new(&none, true).run(&prefix, &items);
    let sec = |s: u8| text.sections.get(&s).map(|v| v.join(", ")).unwrap_or_default();
    format!(
        "{} @ {} \\ {} <=> {} | {} ; {} ; {{{}}}",
        sec(SEC_NAME),
        sec(SEC_KEPT),
        sec(SEC_REMOVED),
        sec(SEC_GUARD),
        sec(SEC_BODY),
        sec(SEC_BODY_BUILTIN),
        sec(SEC_TOKEN)
    )
}

/// Whether two rules are equal up to renaming of variables and identifiers
/// and the normalisation described in the module documentation.
pub fn rules_equivalent(a: &Rule, b: &Rule) -> bool {
    canonical_rule(a) == canonical_rule(b)
}
