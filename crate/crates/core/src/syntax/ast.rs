use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::builtins::Builtin;
use crate::term::{sym, Atom, Fresh, Subst, Substitutable, Sym, Term, Var};

/// A user-defined (CHR) constraint.
pub type UserConstraint = Atom;

/// `h#i`: a CHR atom tagged with an identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IdAtom {
    pub atom: Atom,
    pub id: u32,
}

impl fmt::Display for IdAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.atom, self.id)
    }
}

/// `r@i1,…,il`: rule `r` already fired on that identifier tuple.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Token {
    pub rule: Sym,
    pub ids: Vec<u32>,
}

impl Token {
    pub fn new(rule: &str, ids: Vec<u32>) -> Self {
        Token { rule: sym(rule), ids }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@", self.rule)?;
        for (i, id) in self.ids.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

pub type TokenStore = BTreeSet<Token>;

pub fn fmt_tokens(t: &TokenStore) -> String {
    let parts: Vec<String> = t.iter().map(Token::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Keeps exactly the tokens whose identifiers all occur in `ids`.
pub fn clean(ids: &BTreeSet<u32>, tokens: &TokenStore) -> TokenStore {
    tokens.iter().filter(|t| t.ids.iter().all(|i| ids.contains(i))).cloned().collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BodyItem {
    Chr(Atom, Option<u32>),
    Builtin(Builtin),
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Chr(a, None) => write!(f, "{a}"),
            BodyItem::Chr(a, Some(i)) => write!(f, "{a}#{i}"),
            BodyItem::Builtin(b) => write!(f, "{b}"),
        }
    }
}

impl Substitutable for BodyItem {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        match self {
            BodyItem::Chr(a, i) => BodyItem::Chr(a.map_vars(f), *i),
            BodyItem::Builtin(b) => BodyItem::Builtin(b.map_vars(f)),
        }
    }
}

/// `name @ kept \ removed <=> guard | body ; tokens`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub name: Sym,
    pub kept: Vec<Atom>,
    pub removed: Vec<Atom>,
    pub guard: Vec<Builtin>,
    pub body: Vec<BodyItem>,
    pub tokens: TokenStore,
}

impl Rule {
    /// Head atoms in matching order: kept first, then removed.
    pub fn heads(&self) -> impl Iterator<Item = &Atom> {
        self.kept.iter().chain(self.removed.iter())
    }

    pub fn head_len(&self) -> usize {
        self.kept.len() + self.removed.len()
    }

    pub fn is_propagation(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn head_vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.heads().for_each(|a| a.vars_into(&mut s));
        s
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = self.head_vars();
        self.guard.iter().for_each(|b| b.vars_into(&mut s));
        for item in &self.body {
            match item {
                BodyItem::Chr(a, _) => a.vars_into(&mut s),
                BodyItem::Builtin(b) => b.vars_into(&mut s),
            }
        }
        s
    }

    pub fn body_chr(&self) -> impl Iterator<Item = (&Atom, Option<u32>)> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Chr(a, i) => Some((a, *i)),
            BodyItem::Builtin(_) => None,
        })
    }

    pub fn body_builtins(&self) -> impl Iterator<Item = &Builtin> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Builtin(c) => Some(c),
            BodyItem::Chr(..) => None,
        })
    }

    pub fn body_ids(&self) -> BTreeSet<u32> {
        self.body_chr().filter_map(|(_, i)| i).collect()
    }

    /// Greatest identifier occurring in the rule (body or tokens), 0 if none.
    pub fn max_id(&self) -> u32 {
        let body = self.body_chr().filter_map(|(_, i)| i).max().unwrap_or(0);
        let toks = self.tokens.iter().flat_map(|t| t.ids.iter().copied()).max().unwrap_or(0);
        body.max(toks)
    }

    /// True when every body CHR atom carries an identifier.
    pub fn is_annotated(&self) -> bool {
        self.body_chr().all(|(_, i)| i.is_some())
    }

    pub fn apply_subst(&self, s: &Subst) -> Rule {
        Rule {
            name: self.name.clone(),
            kept: self.kept.apply_subst(s),
            removed: self.removed.apply_subst(s),
            guard: self.guard.apply_subst(s),
            body: self.body.apply_subst(s),
            tokens: self.tokens.clone(),
        }
    }

    /// A variant sharing no variable with `avoid`; identifiers unchanged.
    pub fn rename_apart(&self, fresh: &mut Fresh, avoid: &BTreeSet<Var>) -> Rule {
        let vars = self.vars();
        let ren = fresh.renaming(vars.iter(), avoid);
        self.apply_subst(&ren)
    }

    /// Gives variables produced by renaming readable, unique source names.
    pub fn tidy(&self) -> Rule {
        let vars = self.ordered_vars();
        let mut taken: BTreeSet<String> = vars.iter().filter(|v| v.tag == 0).map(|v| v.name.to_string()).collect();
        let mut bindings = BTreeMap::new();
        for v in vars.iter().filter(|v| v.tag != 0) {
            let base = v.name.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
            let base = if base.is_empty() || base == "_" { v.name.to_string() } else { base };
            let mut cand = base.clone();
            let mut k = 1;
            while taken.contains(&cand) {
                k += 1;
                cand = format!("{base}{k}");
            }
            taken.insert(cand.clone());
            bindings.insert(v.clone(), Term::Var(Var::new(&cand)));
        }
        self.apply_subst(&Subst::from_bindings(bindings))
    }

    /// Variables in order of first occurrence (head, guard, body).
    pub fn ordered_vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let push = |t: &Term, seen: &mut BTreeSet<Var>, out: &mut Vec<Var>| {
            t.map_vars(&mut |v| {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
                Term::Var(v.clone())
            });
        };
        for a in self.heads() {
            a.args.iter().for_each(|t| push(t, &mut seen, &mut out));
        }
        let builtin_terms = |b: &Builtin| -> Vec<Term> {
            match b {
                Builtin::Eq(l, r) | Builtin::Neq(l, r) => vec![l.clone(), r.clone()],
                Builtin::Opaque(a) => a.args.clone(),
                _ => vec![],
            }
        };
        for g in &self.guard {
            builtin_terms(g).iter().for_each(|t| push(t, &mut seen, &mut out));
        }
        for item in &self.body {
            match item {
                BodyItem::Chr(a, _) => a.args.iter().for_each(|t| push(t, &mut seen, &mut out)),
                BodyItem::Builtin(b) => builtin_terms(b).iter().for_each(|t| push(t, &mut seen, &mut out)),
            }
        }
        out
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.name)?;
        if self.removed.is_empty() {
            write!(f, "{} ==> ", join(&self.kept))?;
        } else if self.kept.is_empty() {
            write!(f, "{} <=> ", join(&self.removed))?;
        } else {
            write!(f, "{} \\ {} <=> ", join(&self.kept), join(&self.removed))?;
        }
        if !self.guard.is_empty() {
            write!(f, "{} | ", join(&self.guard))?;
        }
        if self.body.is_empty() {
            write!(f, "true")?;
        } else {
            write!(f, "{}", join(&self.body))?;
        }
        if !self.tokens.is_empty() {
            write!(f, " ; {}", fmt_tokens(&self.tokens))?;
        }
        write!(f, ".")
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_annotated(&self) -> bool {
        self.rules.iter().all(Rule::is_annotated)
    }

    /// Index of the unique rule with this name, or the 1-based position when
    /// `sel` is numeric (optionally prefixed with `#`).
    pub fn select(&self, sel: &str) -> Result<usize, String> {
        let digits = sel.strip_prefix('#').unwrap_or(sel);
        if let Ok(n) = digits.parse::<usize>() {
            return if n >= 1 && n <= self.rules.len() {
                Ok(n - 1)
            } else {
                Err(format!("rule index {n} out of range (program has {} rules)", self.rules.len()))
            };
        }
        let hits: Vec<usize> =
            self.rules.iter().enumerate().filter(|(_, r)| &*r.name == sel).map(|(i, _)| i).collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(format!("no rule named `{sel}`")),
            _ => Err(format!("rule name `{sel}` is ambiguous; select by index instead")),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GoalItem {
    Chr(Atom),
    Builtin(Builtin),
}

impl fmt::Display for GoalItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalItem::Chr(a) => write!(f, "{a}"),
            GoalItem::Builtin(b) => write!(f, "{b}"),
        }
    }
}

impl Substitutable for GoalItem {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        match self {
            GoalItem::Chr(a) => GoalItem::Chr(a.map_vars(f)),
            GoalItem::Builtin(b) => GoalItem::Builtin(b.map_vars(f)),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Goal {
    pub items: Vec<GoalItem>,
}

impl Goal {
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for it in &self.items {
            match it {
                GoalItem::Chr(a) => a.vars_into(&mut s),
                GoalItem::Builtin(b) => b.vars_into(&mut s),
            }
        }
        s
    }

    pub fn has_chr(&self) -> bool {
        self.items.iter().any(|i| matches!(i, GoalItem::Chr(_)))
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.items.is_empty() {
            return write!(f, "true");
        }
        write!(f, "{}", join(&self.items))
    }
}

/// An identified goal: CHR atoms tagged, built-ins untouched.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum IdGoalItem {
    Chr(IdAtom),
    Builtin(Builtin),
}

impl fmt::Display for IdGoalItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdGoalItem::Chr(a) => write!(f, "{a}"),
            IdGoalItem::Builtin(b) => write!(f, "{b}"),
        }
    }
}

/// `I(G)`: ids `1..m` in left-to-right order of the CHR atoms.
pub fn identify(goal: &Goal) -> Vec<IdGoalItem> {
    let mut next = 0;
    goal.items
        .iter()
        .map(|it| match it {
            GoalItem::Chr(a) => {
                next += 1;
                IdGoalItem::Chr(IdAtom { atom: a.clone(), id: next })
            }
            GoalItem::Builtin(b) => IdGoalItem::Builtin(b.clone()),
        })
        .collect()
}

/// `Ann(P)`: bodies of plain rules get identifiers `1..m`, token stores ∅.
/// Already annotated rules are left untouched.
pub fn annotate(p: &Program) -> Program {
    let rules = p
        .rules
        .iter()
        .map(|r| {
            if r.is_annotated() {
                return r.clone();
            }
            let mut next = 0;
            let body = r
                .body
                .iter()
                .map(|it| match it {
                    BodyItem::Chr(a, _) => {
                        next += 1;
                        BodyItem::Chr(a.clone(), Some(next))
                    }
                    b => b.clone(),
                })
                .collect();
            Rule { body, tokens: TokenStore::new(), ..r.clone() }
        })
        .collect();
    Program { rules }
}

/// Drops identifiers and tokens: the plain reading of an annotated program.
pub fn strip_annotations(p: &Program) -> Program {
    let rules = p
        .rules
        .iter()
        .map(|r| Rule {
            body: r
                .body
                .iter()
                .map(|it| match it {
                    BodyItem::Chr(a, _) => BodyItem::Chr(a.clone(), None),
                    b => b.clone(),
                })
                .collect(),
            tokens: TokenStore::new(),
            ..r.clone()
        })
        .collect();
    Program { rules }
}

/// Which transition system a program is meant to run under.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum Semantics {
    /// Plain programs: configurations `⟨G,S,C,T⟩_n`.
    Plain,
    /// Annotated programs: configurations `⟨S,C,T⟩_n`.
    Annotated,
}

impl Semantics {
    /// `.achr` files are annotated; everything else is plain.
    pub fn from_path(path: &std::path::Path) -> Semantics {
        match path.extension().and_then(|e| e.to_str()) {
            Some("achr") => Semantics::Annotated,
            _ => Semantics::Plain,
        }
    }
}
