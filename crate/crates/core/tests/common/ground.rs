//! Brute-force grounding oracle for `=`/`≠` constraints and small-term
//! enumerations for unification.
//!
//! With k constants and n variables in total, a universe of k + n distinct
//! constants decides `∀free ∃quantified` sentences of equality logic: any
//! assignment maps injectively onto it without changing which literals hold.

use std::collections::{BTreeMap, BTreeSet};

use chru_core::builtins::{Builtin, BuiltinStore};
use chru_core::term::{unify, Subst, Term, Var};

pub fn eval(t: &Term, g: &BTreeMap<Var, String>) -> String {
    match t {
        Term::Var(v) => g[v].clone(),
        Term::App(f, _) => f.to_string(),
    }
}

pub fn holds(b: &Builtin, g: &BTreeMap<Var, String>) -> bool {
    match b {
        Builtin::True => true,
        Builtin::False => false,
        Builtin::Eq(l, r) => eval(l, g) == eval(r, g),
        Builtin::Neq(l, r) => eval(l, g) != eval(r, g),
        Builtin::Opaque(_) => unreachable!(),
    }
}

pub fn assignments(vars: &[Var], universe: &[String]) -> Vec<BTreeMap<Var, String>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::new();
        for g in &out {
            for c in universe {
                let mut g2 = g.clone();
                g2.insert(v.clone(), c.clone());
                next.push(g2);
            }
        }
        out = next;
    }
    out
}

pub fn vars_of(bs: &[Builtin]) -> BTreeSet<Var> {
    let mut s = BTreeSet::new();
    bs.iter().for_each(|b| b.vars_into(&mut s));
    s
}

pub fn consts_of(bs: &[Builtin]) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for b in bs {
        if let Builtin::Eq(l, r) | Builtin::Neq(l, r) = b {
            for t in [l, r] {
                if let Term::App(f, _) = t {
                    s.insert(f.to_string());
                }
            }
        }
    }
    s
}

pub fn oracle_entails(store: &[Builtin], quantified: &BTreeSet<Var>, body: &[Builtin]) -> bool {
    let all: Vec<Builtin> = store.iter().chain(body).cloned().collect();
    let vars = vars_of(&all);
    let mut universe: Vec<String> = consts_of(&all).into_iter().collect();
    universe.extend((0..vars.len()).map(|i| format!("fresh{i}")));
    let free: Vec<Var> = vars.iter().filter(|v| !quantified.contains(v)).cloned().collect();
    let q: Vec<Var> = vars.iter().filter(|v| quantified.contains(v)).cloned().collect();
    assignments(&free, &universe).into_iter().all(|g| {
        !store.iter().all(|b| holds(b, &g))
            || assignments(&q, &universe).into_iter().any(|h| {
                let mut gh = g.clone();
                gh.extend(h);
                body.iter().all(|b| holds(b, &gh))
            })
    })
}

pub fn oracle_sat(store: &[Builtin]) -> bool {
    oracle_entails(store, &BTreeSet::new(), &[]) && {
        let vars: Vec<Var> = vars_of(store).into_iter().collect();
        let mut universe: Vec<String> = consts_of(store).into_iter().collect();
        universe.extend((0..vars.len()).map(|i| format!("fresh{i}")));
        assignments(&vars, &universe).into_iter().any(|g| store.iter().all(|b| holds(b, &g)))
    }
}

pub fn literals(terms: &[Term]) -> Vec<Builtin> {
    let mut out = Vec::new();
    for l in terms {
        for r in terms {
            out.push(Builtin::Eq(l.clone(), r.clone()));
            out.push(Builtin::Neq(l.clone(), r.clone()));
        }
    }
    out
}

pub fn small_terms() -> Vec<Term> {
    let atoms = vec![Term::var("X"), Term::var("Y"), Term::constant("a"), Term::constant("b")];
    let mut out = atoms.clone();
    for t in &atoms {
        out.push(Term::app("f", vec![t.clone()]));
    }
    for s in &atoms {
        for t in &atoms {
            out.push(Term::app("g", vec![s.clone(), t.clone()]));
        }
    }
    out.push(Term::app("f", vec![Term::app("f", vec![Term::var("X")])]));
    out.push(Term::app("g", vec![Term::app("f", vec![Term::var("Y")]), Term::var("X")]));
    out
}

/// Ground instances used to probe most-generality.
pub fn ground_substs() -> Vec<Subst> {
    let ground = [
        Term::constant("a"),
        Term::constant("b"),
        Term::app("f", vec![Term::constant("a")]),
        Term::app("f", vec![Term::app("f", vec![Term::constant("a")])]),
        Term::app("g", vec![Term::constant("a"), Term::constant("b")]),
    ];
    let mut out = Vec::new();
    for x in &ground {
        for y in &ground {
            out.push(Subst::from_bindings([(Var::new("X"), x.clone()), (Var::new("Y"), y.clone())]));
        }
    }
    out
}

/// Every store of up to two literals over {X, Y, a, b} against every single
/// body literal over {X, Y, Z, a}, `Z` existentially quantified; returns
/// the number of (store, body) instances compared.
pub fn entailment_exhaustive() -> Result<usize, String> {
    let store_terms = [Term::var("X"), Term::var("Y"), Term::constant("a"), Term::constant("b")];
    let body_terms = [Term::var("X"), Term::var("Y"), Term::var("Z"), Term::constant("a")];
    let store_lits = literals(&store_terms);
    let body_lits = literals(&body_terms);
    let mut stores: Vec<Vec<Builtin>> = vec![vec![]];
    stores.extend(store_lits.iter().map(|l| vec![l.clone()]));
    for a in &store_lits {
        for b in &store_lits {
            stores.push(vec![a.clone(), b.clone()]);
        }
    }
    let quantified: BTreeSet<Var> = [Var::new("Z")].into();
    let mut checked = 0usize;
    for st in &stores {
        let s = BuiltinStore::from_atoms(st);
        if s.satisfiable() != oracle_sat(st) {
            return Err(format!("satisfiability of {st:?}"));
        }
        for b in &body_lits {
            let body = std::slice::from_ref(b);
            if s.entails(&quantified, body) != oracle_entails(st, &quantified, body) {
                return Err(format!("store {st:?} body {b}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Soundness, idempotence and most-generality of `unify` on every pair of
/// small terms; returns the number of pairs checked.
pub fn unify_exhaustive() -> Result<usize, String> {
    let terms = small_terms();
    let probes = ground_substs();
    let vars = [Var::new("X"), Var::new("Y")];
    let mut n = 0;
    for s in &terms {
        for t in &terms {
            n += 1;
            match unify(&[(s.clone(), t.clone())]) {
                Some(mgu) => {
                    if mgu.apply(s) != mgu.apply(t) {
                        return Err(format!("{s} = {t}: not a unifier"));
                    }
                    if mgu.apply(&mgu.apply(s)) != mgu.apply(s) {
                        return Err(format!("{s} = {t}: not idempotent"));
                    }
                    for theta in probes.iter().filter(|th| th.apply(s) == th.apply(t)) {
                        // θ = θ ∘ mgu on the variables involved
                        for v in &vars {
                            let x = Term::Var(v.clone());
                            if theta.apply(&mgu.apply(&x)) != theta.apply(&x) {
                                return Err(format!("{s} = {t}: a unifier does not factor through the result"));
                            }
                        }
                    }
                }
                None => {
                    if probes.iter().any(|th| th.apply(s) == th.apply(t)) {
                        return Err(format!("{s} = {t}: a unifier exists"));
                    }
                }
            }
        }
    }
    Ok(n)
}
