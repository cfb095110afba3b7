use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::builtins::{Builtin, BuiltinStore};
use crate::engine::inst;
use crate::syntax::{clean, BodyItem, Rule, Token, TokenStore};
use crate::term::{match_oneway, solve_eqs, Atom, Fresh, Subst, Substitutable, Term, Var};

/// Why an unfolding step was refused.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
pub enum Refusal {
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error("the selected atoms are not an instance of the unfolding rule's head")]
    NoMatching,
    #[error("token {0} is already in the rule's token store")]
    TokenPresent(String),
    #[error("guard variables {0} of the unfolding rule would escape the head")]
    VariableEscape(String),
    #[error("the resulting guard is unsatisfiable")]
    UnsatisfiableGuard,
}

/// Renames `cl_v` apart from `avoid`; the fresh variables carry tags.
pub(crate) fn rename_rule_apart(cl_v: &Rule, avoid: &BTreeSet<Var>) -> Rule {
    let mut fresh = Fresh::above(avoid.iter());
    cl_v.rename_apart(&mut fresh, avoid)
}

/// Solved form of `C ∧ D` that keeps head variables of `cl_r` as
/// representatives whenever possible, so that matching results are stated
/// in terms of the head.
fn solved_prefer_head(cl_r: &Rule, cd: &[Builtin]) -> Option<Subst> {
    let head = cl_r.head_vars();
    let rank = |v: &Var| head.contains(v);
    let bind_left = |x: &Var, y: &Var| !rank(x) || rank(y);
    let eqs: Vec<(Term, Term)> = cd
        .iter()
        .filter_map(|b| match b {
            Builtin::Eq(l, r) => Some((l.clone(), r.clone())),
            _ => None,
        })
        .collect();
    solve_eqs(Subst::new(), eqs, &|_| true, &bind_left)
}

/// Unfolds `cl_r` with `cl_v`, matching the head of `cl_v` (kept part
/// first) against the body atoms of `cl_r` with identifiers `sel`.
///
/// `cl_v` is renamed apart internally; the result is tidied.
pub fn unfold(cl_r: &Rule, cl_v: &Rule, sel: &[u32]) -> Result<Rule, Refusal> {
    let v = rename_rule_apart(cl_v, &cl_r.vars());
    let heads: Vec<&Atom> = v.heads().collect();
    if sel.len() != heads.len() {
        return Err(Refusal::InvalidSelection(format!(
            "{} identifiers given for a head of {} atoms",
            sel.len(),
            heads.len()
        )));
    }
    if sel.iter().collect::<BTreeSet<_>>().len() != sel.len() {
        return Err(Refusal::InvalidSelection("repeated identifier".into()));
    }
    let by_id: BTreeMap<u32, &Atom> = cl_r.body_chr().filter_map(|(a, i)| i.map(|i| (i, a))).collect();
    let mut s_atoms = Vec::new();
    for (i, h) in sel.iter().zip(&heads) {
        let a = by_id
            .get(i)
            .ok_or_else(|| Refusal::InvalidSelection(format!("no body atom with identifier {i}")))?;
        if !a.same_signature(h) {
            return Err(Refusal::NoMatching);
        }
        s_atoms.push(*a);
    }

    let c: Vec<Builtin> = cl_r.body_builtins().cloned().collect();
    let mut cd = c.clone();
    cd.extend(cl_r.guard.iter().cloned());
    let store = BuiltinStore::from_atoms(&cd);
    if !store.satisfiable() {
        return Err(Refusal::UnsatisfiableGuard);
    }
    let sigma = solved_prefer_head(cl_r, &cd).ok_or(Refusal::UnsatisfiableGuard)?;

    let pattern: Vec<Term> = heads.iter().map(|h| h.to_term()).collect();
    let target: Vec<Term> = s_atoms.iter().map(|a| sigma.apply(&a.to_term())).collect();
    let theta = match_oneway(&pattern, &target).ok_or(Refusal::NoMatching)?;

    let token = Token { rule: v.name.clone(), ids: sel.to_vec() };
    if cl_r.tokens.contains(&token) {
        return Err(Refusal::TokenPresent(token.to_string()));
    }

    let none = BTreeSet::new();
    let d2: Vec<Builtin> = v
        .guard
        .iter()
        .map(|d| d.apply_subst(&theta))
        .filter(|d| !store.entails(&none, std::slice::from_ref(d)))
        .collect();

    let mut escaped = BTreeSet::new();
    d2.iter().for_each(|d| d.vars_into(&mut escaped));
    let mut hv = BTreeSet::new();
    heads.iter().for_each(|h| h.apply_subst(&theta).vars_into(&mut hv));
    let rhead = cl_r.head_vars();
    let bad: Vec<String> =
        escaped.intersection(&hv).filter(|x| !rhead.contains(x)).map(ToString::to_string).collect();
    if !bad.is_empty() {
        return Err(Refusal::VariableEscape(bad.join(", ")));
    }

    let mut guard = cl_r.guard.clone();
    guard.extend(d2);
    if !BuiltinStore::from_atoms(&guard).satisfiable() {
        return Err(Refusal::UnsatisfiableGuard);
    }

    let m = cl_r.max_id();
    let (b1, t1, _) = inst(&v.body, &v.tokens, m);
    let n_kept = v.kept.len();
    let removed: BTreeSet<u32> = sel[n_kept..].iter().copied().collect();

    let mut body: Vec<BodyItem> = cl_r
        .body
        .iter()
        .filter(|b| matches!(b, BodyItem::Chr(_, Some(i)) if !removed.contains(i)))
        .cloned()
        .collect();
    body.extend(b1);
    body.extend(c.into_iter().map(BodyItem::Builtin));
    let mut eqs: Vec<(Term, Term)> = Vec::new();
    for (s, h) in s_atoms.iter().zip(&heads) {
        for (l, r) in s.args.iter().zip(&h.args) {
            if !eqs.contains(&(l.clone(), r.clone())) && !eqs.contains(&(r.clone(), l.clone())) {
                eqs.push((l.clone(), r.clone()));
            }
        }
    }
    // decomposed and oriented: f(a)=f(W) is printed as W=a, a=a is dropped
    let eqs: Vec<Builtin> = eqs.into_iter().map(|(l, r)| Builtin::Eq(l, r)).collect();
    body.extend(super::normalize_builtins(&eqs).into_iter().map(BodyItem::Builtin));

    let tokens: TokenStore = if v.removed.is_empty() {
        let mut t = cl_r.tokens.clone();
        t.extend(t1);
        t.insert(token);
        t
    } else {
        let keep: BTreeSet<u32> = cl_r.body_ids().difference(&removed).copied().collect();
        let mut t = clean(&keep, &cl_r.tokens);
        t.extend(t1);
        t
    };

    let out = Rule {
        name: cl_r.name.clone(),
        kept: cl_r.kept.clone(),
        removed: cl_r.removed.clone(),
        guard,
        body,
        tokens,
    };
    Ok(out.tidy())
}

/// Every ordered injection of `cl_v`'s head positions into the body atoms of
/// `cl_r` with matching predicate symbols, as identifier sequences.
pub fn selections(cl_r: &Rule, cl_v: &Rule) -> Vec<Vec<u32>> {
    let body: Vec<(&Atom, u32)> = cl_r.body_chr().filter_map(|(a, i)| i.map(|i| (a, i))).collect();
    let heads: Vec<&Atom> = cl_v.heads().collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(body: &[(&Atom, u32)], heads: &[&Atom], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let k = cur.len();
        if k == heads.len() {
            out.push(cur.clone());
            return;
        }
        for (a, i) in body {
            if cur.contains(i) || !a.same_signature(heads[k]) {
                continue;
            }
            cur.push(*i);
            go(body, heads, cur, out);
            cur.pop();
        }
    }
    go(&body, &heads, &mut cur, &mut out);
    out
}
