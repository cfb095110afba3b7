//! Built-in constraints over the Herbrand domain.
//!
//! Equality and disequality are decided exactly (infinite universe); every
//! other built-in predicate is *opaque*: it is kept syntactically, is only
//! entailed when an instance is present in the store, and never makes a
//! store unsatisfiable.

use std::collections::BTreeSet;
use std::fmt;

use crate::canon::{lit, push_term, term_toks, CanonText, Canonicalizer, Item, Tok};
use crate::term::{solve_eqs, Atom, Subst, Substitutable, Term, Var};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Builtin {
    True,
    False,
    Eq(Term, Term),
    Neq(Term, Term),
    Opaque(Atom),
}

/// Binary opaque predicates printed infix.
pub(crate) fn is_infix_relation(p: &str) -> bool {
    matches!(p, ">" | "<" | ">=" | "=<")
}

impl Builtin {
    pub fn eq(l: Term, r: Term) -> Self {
        Builtin::Eq(l, r)
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Builtin::True | Builtin::False => {}
            Builtin::Eq(l, r) | Builtin::Neq(l, r) => {
                l.vars_into(out);
                r.vars_into(out);
            }
            Builtin::Opaque(a) => a.vars_into(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.vars_into(&mut s);
        s
    }

    pub(crate) fn toks(&self) -> Vec<Tok> {
        let mut out = Vec::new();
        match self {
            Builtin::True => lit(&mut out, "true"),
            Builtin::False => lit(&mut out, "false"),
            Builtin::Eq(l, r) => {
                push_term(&mut out, l);
                lit(&mut out, "=");
                push_term(&mut out, r);
            }
            Builtin::Neq(l, r) => {
                push_term(&mut out, l);
                lit(&mut out, "≠");
                push_term(&mut out, r);
            }
            Builtin::Opaque(a) if a.args.len() == 2 && is_infix_relation(&a.pred) => {
                push_term(&mut out, &a.args[0]);
                lit(&mut out, &a.pred);
                push_term(&mut out, &a.args[1]);
            }
            Builtin::Opaque(a) => push_term(&mut out, &a.to_term()),
        }
        out
    }

    /// Canonicalisation item; (dis)equalities may be read in either direction.
    pub(crate) fn item(&self, section: u8) -> Item {
        match self {
            Builtin::Eq(l, r) => Item::symmetric(section, term_toks(l), "=", term_toks(r)),
            Builtin::Neq(l, r) => Item::symmetric(section, term_toks(l), "≠", term_toks(r)),
            b => Item::new(section, b.toks()),
        }
    }
}

impl Substitutable for Builtin {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        match self {
            Builtin::True => Builtin::True,
            Builtin::False => Builtin::False,
            Builtin::Eq(l, r) => Builtin::Eq(l.map_vars(f), r.map_vars(f)),
            Builtin::Neq(l, r) => Builtin::Neq(l.map_vars(f), r.map_vars(f)),
            Builtin::Opaque(a) => Builtin::Opaque(a.map_vars(f)),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::True => write!(f, "true"),
            Builtin::False => write!(f, "false"),
            Builtin::Eq(l, r) => write!(f, "{l}={r}"),
            Builtin::Neq(l, r) => write!(f, "{l}≠{r}"),
            Builtin::Opaque(a) if a.args.len() == 2 && is_infix_relation(&a.pred) => {
                write!(f, "{}{}{}", a.args[0], a.pred, a.args[1])
            }
            Builtin::Opaque(a) => write!(f, "{a}"),
        }
    }
}

/// Conjunction of built-ins in solved form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuiltinStore {
    solved: Subst,
    diseqs: Vec<(Term, Term)>,
    opaques: Vec<Atom>,
    inconsistent: bool,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot project an inconsistent built-in store")]
pub struct InconsistentStore;

fn all(_: &Var) -> bool {
    true
}

fn left(_: &Var, _: &Var) -> bool {
    true
}

impl BuiltinStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a Builtin>) -> Self {
        let mut s = Self::new();
        for a in atoms {
            s.add_mut(a);
        }
        s
    }

    pub fn solved(&self) -> &Subst {
        &self.solved
    }

    pub fn diseqs(&self) -> &[(Term, Term)] {
        &self.diseqs
    }

    pub fn opaques(&self) -> &[Atom] {
        &self.opaques
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn satisfiable(&self) -> bool {
        !self.inconsistent
    }

    pub fn apply(&self, t: &Term) -> Term {
        self.solved.apply(t)
    }

    /// `self ∧ c` as a new store.
    pub fn add(&self, c: &Builtin) -> Self {
        let mut s = self.clone();
        s.add_mut(c);
        s
    }

    pub fn add_all<'a>(&mut self, cs: impl IntoIterator<Item = &'a Builtin>) {
        for c in cs {
            self.add_mut(c);
        }
    }

    pub fn add_mut(&mut self, c: &Builtin) {
        if self.inconsistent {
            return;
        }
        match c {
            Builtin::True => {}
            Builtin::False => self.inconsistent = true,
            Builtin::Eq(l, r) => self.add_equations(&[(l.clone(), r.clone())]),
            Builtin::Neq(l, r) => {
                let (l, r) = (self.solved.apply(l), self.solved.apply(r));
                self.push_diseq(l, r);
            }
            Builtin::Opaque(a) => {
                let a = a.apply_subst(&self.solved);
                if !self.opaques.contains(&a) {
                    self.opaques.push(a);
                }
            }
        }
    }

    pub fn add_equations(&mut self, eqs: &[(Term, Term)]) {
        if self.inconsistent {
            return;
        }
        match solve_eqs(self.solved.clone(), eqs.iter().cloned(), &all, &left) {
            None => self.inconsistent = true,
            Some(s) => {
                if s != self.solved {
                    self.solved = s;
                    let old = std::mem::take(&mut self.diseqs);
                    for (l, r) in old {
                        let (l, r) = (self.solved.apply(&l), self.solved.apply(&r));
                        self.push_diseq(l, r);
                        if self.inconsistent {
                            return;
                        }
                    }
                    let mut ops: Vec<Atom> = Vec::with_capacity(self.opaques.len());
                    for a in self.opaques.apply_subst(&self.solved) {
                        if !ops.contains(&a) {
                            ops.push(a);
                        }
                    }
                    self.opaques = ops;
                }
            }
        }
    }

    fn push_diseq(&mut self, l: Term, r: Term) {
        match solve_eqs(Subst::new(), [(l.clone(), r.clone())], &all, &left) {
            None => {}
            Some(mgu) if mgu.is_empty() => self.inconsistent = true,
            Some(_) if !self.diseqs.contains(&(l.clone(), r.clone())) => self.diseqs.push((l, r)),
            Some(_) => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (v, t) in self.solved.iter() {
            out.insert(v.clone());
            t.vars_into(&mut out);
        }
        for (l, r) in &self.diseqs {
            l.vars_into(&mut out);
            r.vars_into(&mut out);
        }
        for a in &self.opaques {
            a.vars_into(&mut out);
        }
        out
    }

    /// The store read back as a conjunction of atoms.
    pub fn to_atoms(&self) -> Vec<Builtin> {
        if self.inconsistent {
            return vec![Builtin::False];
        }
        let mut out: Vec<Builtin> =
            self.solved.iter().map(|(v, t)| Builtin::Eq(Term::Var(v.clone()), t.clone())).collect();
        out.extend(self.diseqs.iter().map(|(l, r)| Builtin::Neq(l.clone(), r.clone())));
        out.extend(self.opaques.iter().cloned().map(Builtin::Opaque));
        out
    }

    /// Decides `CT ⊨ self → ∃quantified. body`.
    ///
    /// `quantified` must be disjoint from the store's variables.
    pub fn entails(&self, quantified: &BTreeSet<Var>, body: &[Builtin]) -> bool {
        if self.inconsistent {
            return true;
        }
        let mut eqs = Vec::new();
        let mut neqs = Vec::new();
        let mut ops = Vec::new();
        for b in body {
            match b {
                Builtin::True => {}
                Builtin::False => return false,
                Builtin::Eq(l, r) => eqs.push((self.solved.apply(l), self.solved.apply(r))),
                Builtin::Neq(l, r) => neqs.push((self.solved.apply(l), self.solved.apply(r))),
                Builtin::Opaque(a) => ops.push(a.apply_subst(&self.solved)),
            }
        }
        let q = |v: &Var| quantified.contains(v);
        let Some(mu) = solve_eqs(Subst::new(), eqs, &q, &left) else {
            return false;
        };
        let ops: Vec<Atom> = ops.apply_subst(&mu);
        self.entails_opaques(quantified, &ops, mu, &neqs)
    }

    fn entails_opaques(&self, quantified: &BTreeSet<Var>, ops: &[Atom], mu: Subst, neqs: &[(Term, Term)]) -> bool {
        let Some((first, rest)) = ops.split_first() else {
            return self.entails_diseqs(quantified, &mu, neqs);
        };
        let first = first.apply_subst(&mu);
        let q = |v: &Var| quantified.contains(v);
        for cand in &self.opaques {
            if !cand.same_signature(&first) {
                continue;
            }
            if let Some(mu2) = solve_eqs(mu.clone(), [(first.to_term(), cand.to_term())], &q, &left) {
                if self.entails_opaques(quantified, rest, mu2, neqs) {
                    return true;
                }
            }
        }
        false
    }

    fn entails_diseqs(&self, quantified: &BTreeSet<Var>, mu: &Subst, neqs: &[(Term, Term)]) -> bool {
        neqs.iter().all(|(l, r)| {
            let (l, r) = (mu.apply(l), mu.apply(r));
            let prefer_q = |x: &Var, _: &Var| quantified.contains(x);
            match solve_eqs(Subst::new(), [(l, r)], &all, &prefer_q) {
                None => true,
                // A still-free quantified variable can always be chosen to
                // differ (infinite universe).
                Some(nu) if nu.mentions_any(|v| quantified.contains(v)) => true,
                Some(nu) => {
                    let mut probe = self.clone();
                    probe.add_equations(&nu.equations());
                    probe.inconsistent
                }
            }
        })
    }

    /// Projects the store onto `keep`, also substituting into `terms`
    /// (typically CHR atoms viewed as terms) whose variables stay relevant.
    pub fn project_terms(&self, keep: &BTreeSet<Var>, terms: &[Term]) -> Result<Projection, InconsistentStore> {
        if self.inconsistent {
            return Err(InconsistentStore);
        }
        // Re-solve so that kept variables are preferred as representatives.
        let rank = |v: &Var| (keep.contains(v), std::cmp::Reverse(v.clone()));
        let bind_x = |x: &Var, y: &Var| rank(x) < rank(y);
        let sigma = solve_eqs(Subst::new(), self.solved.equations(), &all, &bind_x)
            .expect("solved form is satisfiable");
        let terms: Vec<Term> = terms.iter().map(|t| sigma.apply(t)).collect();
        let mut eqs: Vec<(Var, Term)> = Vec::new();
        for v in keep {
            if let Some(t) = sigma.get(v) {
                eqs.push((v.clone(), t.clone()));
            }
        }
        let opaques: Vec<Atom> = self.opaques.apply_subst(&sigma);
        let mut relevant: BTreeSet<Var> = keep.clone();
        terms.iter().for_each(|t| t.vars_into(&mut relevant));
        eqs.iter().for_each(|(_, t)| t.vars_into(&mut relevant));
        opaques.iter().for_each(|a| a.vars_into(&mut relevant));
        let mut diseqs: Vec<Vec<(Var, Term)>> = Vec::new();
        for (l, r) in &self.diseqs {
            let (l, r) = (sigma.apply(l), sigma.apply(r));
            let rrank = |v: &Var| (relevant.contains(v), std::cmp::Reverse(v.clone()));
            let bind = |x: &Var, y: &Var| rrank(x) < rrank(y);
            let Some(nu) = solve_eqs(Subst::new(), [(l, r)], &all, &bind) else { continue };
            if nu.mentions_any(|v| !relevant.contains(v)) {
                continue;
            }
            let d: Vec<(Var, Term)> = nu.iter().map(|(v, t)| (v.clone(), t.clone())).collect();
            if !diseqs.contains(&d) {
                diseqs.push(d);
            }
        }
        Ok(Projection { terms, eqs, diseqs, opaques })
    }

    /// Canonical printable reading of `∃(vars ∖ keep). store`.
    pub fn project(&self, keep: &BTreeSet<Var>) -> Result<String, InconsistentStore> {
        let p = self.project_terms(keep, &[])?;
        Ok(p.render(keep, &[]))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.vars()
    }
}

/// Result of [`BuiltinStore::project_terms`].
#[derive(Clone, Debug)]
pub struct Projection {
    pub terms: Vec<Term>,
    pub eqs: Vec<(Var, Term)>,
    /// Each entry is a negated conjunction of bindings `¬(X1=t1 ∧ …)`.
    pub diseqs: Vec<Vec<(Var, Term)>>,
    pub opaques: Vec<Atom>,
}

/// Canonical sections used when projections are rendered.
pub(crate) const SEC_EQ: u8 = 20;
pub(crate) const SEC_NEQ: u8 = 21;
pub(crate) const SEC_OPAQUE: u8 = 22;

impl Projection {
    /// Built-in part as canonicalisation items.
    pub(crate) fn builtin_items(&self) -> Vec<Item> {
        let mut items = Vec::new();
        for (v, t) in &self.eqs {
            items.push(Builtin::Eq(Term::Var(v.clone()), t.clone()).item(SEC_EQ));
        }
        for d in &self.diseqs {
            if let [(v, t)] = d.as_slice() {
                items.push(Builtin::Neq(Term::Var(v.clone()), t.clone()).item(SEC_NEQ));
            } else {
                let mut l = Vec::new();
                let mut r = Vec::new();
                lit(&mut l, "(");
                lit(&mut r, "(");
                for (i, (v, t)) in d.iter().enumerate() {
                    if i > 0 {
                        lit(&mut l, ",");
                        lit(&mut r, ",");
                    }
                    l.push(Tok::Var(v.clone()));
                    push_term(&mut r, t);
                }
                lit(&mut l, ")≠");
                l.extend(r);
                lit(&mut l, ")");
                items.push(Item::new(SEC_NEQ, l));
            }
        }
        for a in &self.opaques {
            items.push(Builtin::Opaque(a.clone()).item(SEC_OPAQUE));
        }
        items
    }

    /// Renders `extra` items (e.g. CHR atoms) together with the built-in
    /// part as a canonical comma-separated conjunction.
    pub(crate) fn render(&self, keep: &BTreeSet<Var>, extra: &[Item]) -> String {
        let mut items: Vec<Item> = extra.to_vec();
        items.extend(self.builtin_items());
        let text = Canonicalizer::new(keep, false).run(&[], &items);
        join_sections(&text)
    }
}

pub(crate) fn join_sections(text: &CanonText) -> String {
    let parts: Vec<&str> = text.sections.values().flatten().map(String::as_str).collect();
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(", ")
    }
}

/// `CT ⊨ c ↔ d` under the implemented theory.
pub fn guards_equivalent(c: &[Builtin], d: &[Builtin]) -> bool {
    let sc = BuiltinStore::from_atoms(c);
    let sd = BuiltinStore::from_atoms(d);
    let none = BTreeSet::new();
    sc.entails(&none, d) && sd.entails(&none, c)
}

/// Mutual entailment of two stores.
pub fn stores_equivalent(a: &BuiltinStore, b: &BuiltinStore) -> bool {
    let none = BTreeSet::new();
    a.entails(&none, &b.to_atoms()) && b.entails(&none, &a.to_atoms())
}
