//! First-order terms, idempotent substitutions, unification with occurs
//! check, one-way matching and renamings of variables and identifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Interned-ish symbol: cheap to clone and safe to share across threads.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// A variable. `tag == 0` marks a source-level variable; fresh variables
/// produced by renaming carry a positive tag drawn from a [`Fresh`] counter.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Sym,
    pub tag: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: sym(name), tag: 0 }
    }

    pub fn tagged(name: Sym, tag: u32) -> Self {
        Var { name, tag }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}_{}", self.name, self.tag)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    App(Sym, Vec<Term>),
}

/// Functors printed infix when binary.
pub(crate) fn is_infix_functor(f: &str) -> bool {
    matches!(f, "+" | "-")
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(sym(name), Vec::new())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(sym(f), args)
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.vars_into(&mut s);
        s
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) if args.len() == 2 && is_infix_functor(g) => {
                write!(f, "{}{g}", args[0])?;
                match &args[1] {
                    Term::App(h, a) if a.len() == 2 && is_infix_functor(h) => write!(f, "({})", args[1]),
                    r => write!(f, "{r}"),
                }
            }
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A predicate applied to arguments: used both for user-defined constraints
/// and for opaque built-ins.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: sym(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn same_signature(&self, other: &Atom) -> bool {
        self.pred == other.pred && self.args.len() == other.args.len()
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Var>) {
        self.args.iter().for_each(|a| a.vars_into(out));
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        self.vars_into(&mut s);
        s
    }

    /// The atom viewed as a term, handy for unification of whole atoms.
    pub fn to_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn from_term(t: Term) -> Option<Atom> {
        match t {
            Term::App(pred, args) => Some(Atom { pred, args }),
            Term::Var(_) => None,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.map_vars(f)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Idempotent substitution. Identity bindings are never stored.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution from raw bindings without normalising; the
    /// caller guarantees idempotence (e.g. variable renamings).
    pub fn from_bindings(bindings: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let map = bindings.into_iter().filter(|(v, t)| t.as_var() != Some(v)).collect();
        Subst { map }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.map.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// Adds `v ↦ t` where `t` is already normalised by `self` and does not
    /// contain `v`; keeps the substitution idempotent.
    fn bind(&mut self, v: Var, t: Term) {
        let single = Subst { map: BTreeMap::from([(v.clone(), t.clone())]) };
        for rhs in self.map.values_mut() {
            if rhs.occurs(&v) {
                *rhs = single.apply(rhs);
            }
        }
        self.map.insert(v, t);
    }

    /// The substitution read back as a list of equations `X = t`.
    pub fn equations(&self) -> Vec<(Term, Term)> {
        self.map.iter().map(|(v, t)| (Term::Var(v.clone()), t.clone())).collect()
    }

    /// True when some variable in the domain or range satisfies `pred`.
    pub fn mentions_any(&self, pred: impl Fn(&Var) -> bool) -> bool {
        self.map.iter().any(|(v, t)| pred(v) || t.vars().iter().any(&pred))
    }
}

/// Things substitutions and renamings can be applied to.
pub trait Substitutable: Sized {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self;

    fn apply_subst(&self, s: &Subst) -> Self {
        self.map_vars(&mut |v| s.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }
}

impl Substitutable for Term {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        Term::map_vars(self, f)
    }
}

impl Substitutable for Atom {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        Atom::map_vars(self, f)
    }
}

impl<T: Substitutable> Substitutable for Vec<T> {
    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Self {
        self.iter().map(|x| x.map_vars(f)).collect()
    }
}

/// Applies `θ` to any substitutable syntax object.
pub fn apply_subst<T: Substitutable>(x: &T, theta: &Subst) -> T {
    x.apply_subst(theta)
}

/// Core solver shared by unification flavours.
///
/// * `can_bind` restricts which variables may be bound (others are rigid).
/// * `bind_left(x, y)` decides, for two bindable variables, whether `x` is
///   bound to `y` (true) or the reverse.
pub(crate) fn solve_eqs(
    mut s: Subst,
    eqs: impl IntoIterator<Item = (Term, Term)>,
    can_bind: &dyn Fn(&Var) -> bool,
    bind_left: &dyn Fn(&Var, &Var) -> bool,
) -> Option<Subst> {
    let mut work: Vec<(Term, Term)> = eqs.into_iter().collect();
    work.reverse();
    while let Some((l, r)) = work.pop() {
        let l = s.apply(&l);
        let r = s.apply(&r);
        if l == r {
            continue;
        }
        match (l, r) {
            (Term::Var(x), Term::Var(y)) => {
                let (bx, by) = (can_bind(&x), can_bind(&y));
                match (bx, by) {
                    (true, true) => {
                        if bind_left(&x, &y) {
                            s.bind(x, Term::Var(y))
                        } else {
                            s.bind(y, Term::Var(x))
                        }
                    }
                    (true, false) => s.bind(x, Term::Var(y)),
                    (false, true) => s.bind(y, Term::Var(x)),
                    (false, false) => return None,
                }
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if !can_bind(&x) || t.occurs(&x) {
                    return None;
                }
                s.bind(x, t);
            }
            (Term::App(f, a), Term::App(g, b)) => {
                if f != g || a.len() != b.len() {
                    return None;
                }
                for pair in a.into_iter().zip(b).rev() {
                    work.push(pair);
                }
            }
        }
    }
    Some(s)
}

/// Most general unifier of a list of equations (CET, occurs check on).
pub fn unify(eqs: &[(Term, Term)]) -> Option<Subst> {
    solve_eqs(Subst::new(), eqs.iter().cloned(), &|_| true, &|_, _| true)
}

/// Extends an existing idempotent substitution with further equations.
pub fn unify_with(s: &Subst, eqs: &[(Term, Term)]) -> Option<Subst> {
    solve_eqs(s.clone(), eqs.iter().cloned(), &|_| true, &|_, _| true)
}

/// One-way matching: `θ` with `dom θ ⊆ Fv(pattern)` and `pattern θ = target`.
/// Pattern and target are expected to be variable-disjoint.
pub fn match_oneway(pattern: &[Term], target: &[Term]) -> Option<Subst> {
    if pattern.len() != target.len() {
        return None;
    }
    let mut theta = BTreeMap::new();
    for (p, t) in pattern.iter().zip(target) {
        if !match_into(&mut theta, p, t) {
            return None;
        }
    }
    Some(Subst::from_bindings(theta))
}

pub(crate) fn match_into(theta: &mut BTreeMap<Var, Term>, p: &Term, t: &Term) -> bool {
    match p {
        Term::Var(v) => match theta.get(v) {
            Some(b) => b == t,
            None => {
                theta.insert(v.clone(), t.clone());
                true
            }
        },
        Term::App(f, ps) => match t {
            Term::App(g, ts) if f == g && ps.len() == ts.len() => {
                ps.iter().zip(ts).all(|(p, t)| match_into(theta, p, t))
            }
            _ => false,
        },
    }
}

/// Session-local source of fresh variable tags.
#[derive(Clone, Debug)]
pub struct Fresh {
    next: u32,
}

impl Default for Fresh {
    fn default() -> Self {
        Fresh { next: 1 }
    }
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    /// A counter whose tags exceed every tag in `vars`.
    pub fn above<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        let max = vars.into_iter().map(|v| v.tag).max().unwrap_or(0);
        Fresh { next: max + 1 }
    }

    pub fn bump_above<'a>(&mut self, vars: impl IntoIterator<Item = &'a Var>) {
        let max = vars.into_iter().map(|v| v.tag).max().unwrap_or(0);
        self.next = self.next.max(max + 1);
    }

    pub fn var(&mut self, base: &Var) -> Var {
        let v = Var::tagged(base.name.clone(), self.next);
        self.next += 1;
        v
    }

    /// A renaming of `vars` onto fresh variables avoiding `avoid`.
    pub fn renaming<'a>(
        &mut self,
        vars: impl IntoIterator<Item = &'a Var>,
        avoid: &BTreeSet<Var>,
    ) -> Subst {
        self.bump_above(avoid.iter());
        Subst::from_bindings(vars.into_iter().map(|v| (v.clone(), Term::Var(self.var(v)))).collect::<Vec<_>>())
    }
}

/// A bijective renaming of identifiers; identity outside its domain.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IdRenaming {
    map: BTreeMap<u32, u32>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("identifier renaming is not a bijection on its domain")]
pub struct NotBijective;

impl IdRenaming {
    pub fn identity() -> Self {
        Self::default()
    }

    /// `pairs` maps old identifiers to new ones; must be a permutation of
    /// its own domain.
    pub fn new(pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, NotBijective> {
        let map: BTreeMap<u32, u32> = pairs.into_iter().collect();
        let dom: BTreeSet<u32> = map.keys().copied().collect();
        let img: BTreeSet<u32> = map.values().copied().collect();
        if dom != img || img.len() != map.len() {
            return Err(NotBijective);
        }
        Ok(IdRenaming { map })
    }

    pub fn apply(&self, id: u32) -> u32 {
        self.map.get(&id).copied().unwrap_or(id)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &IdRenaming) -> IdRenaming {
        let mut map = BTreeMap::new();
        let dom: BTreeSet<u32> = self.map.keys().chain(other.map.keys()).copied().collect();
        for i in dom {
            let j = other.apply(self.apply(i));
            if j != i {
                map.insert(i, j);
            }
        }
        IdRenaming { map }
    }

    pub fn inverse(&self) -> IdRenaming {
        IdRenaming { map: self.map.iter().map(|(a, b)| (*b, *a)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn f(n: &str, a: Vec<Term>) -> Term {
        Term::app(n, a)
    }

    #[test]
    fn apply_examples() {
        let s = unify(&[(v("X"), c("a"))]).unwrap();
        assert_eq!(s.apply(&f("f", vec![v("X"), v("Y")])).to_string(), "f(a,Y)");
        assert_eq!(Subst::new().apply(&v("X")), v("X"));
        let theta = Subst::from_bindings([
            (Var::new("V"), v("X")),
            (Var::new("U"), f("f", vec![v("Z")])),
            (Var::new("W"), c("a")),
        ]);
        let t = f("p", vec![v("V"), v("U"), v("W")]);
        assert_eq!(theta.apply(&t).to_string(), "p(X,f(Z),a)");
    }

    #[test]
    fn unify_examples() {
        let s = unify(&[(f("f", vec![v("X"), c("a")]), f("f", vec![c("b"), v("Y")]))]).unwrap();
        assert_eq!(s.get(&Var::new("X")), Some(&c("b")));
        assert_eq!(s.get(&Var::new("Y")), Some(&c("a")));
        assert!(unify(&[(v("X"), f("f", vec![v("X")]))]).is_none());
        let s = unify(&[(
            f("p", vec![v("X"), f("g", vec![v("Y")])]),
            f("p", vec![c("a"), f("g", vec![c("b")])]),
        )])
        .unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_is_idempotent_on_chains() {
        let s = unify(&[(v("X"), v("Y")), (v("Y"), f("f", vec![v("Z")])), (v("Z"), c("a"))]).unwrap();
        for (_, t) in s.iter() {
            assert_eq!(s.apply(t), *t);
        }
        assert_eq!(s.apply(&v("X")).to_string(), "f(a)");
    }

    #[test]
    fn match_examples() {
        let pat = [
            f("q", vec![v("V"), v("U"), v("W")]),
            f("r", vec![f("g", vec![v("V"), c("b")]), f("f", vec![v("W")]), v("U")]),
        ];
        let tgt = [
            f("q", vec![v("X"), f("f", vec![v("Z")]), c("a")]),
            f("r", vec![f("g", vec![v("X"), c("b")]), f("f", vec![c("a")]), f("f", vec![v("Z")])]),
        ];
        let th = match_oneway(&pat, &tgt).unwrap();
        assert_eq!(th.get(&Var::new("V")), Some(&v("X")));
        assert_eq!(th.get(&Var::new("U")).unwrap().to_string(), "f(Z)");
        assert_eq!(th.get(&Var::new("W")), Some(&c("a")));
        assert!(match_oneway(&[v("X")], &[f("f", vec![c("a")])]).is_some());
        assert!(match_oneway(&[f("f", vec![c("a")])], &[v("X")]).is_none());
        assert!(match_oneway(&[f("p", vec![v("X"), v("X")])], &[f("p", vec![c("a"), c("b")])]).is_none());
    }

    #[test]
    fn id_renaming_laws() {
        let r = IdRenaming::new([(1, 2), (2, 1)]).unwrap();
        assert_eq!(r.apply(1), 2);
        assert_eq!(r.apply(7), 7);
        assert_eq!(r.then(&r.inverse()), IdRenaming::identity());
        assert!(IdRenaming::new([(1, 2)]).is_err());
    }

    #[test]
    fn infix_display() {
        let t = f("+", vec![v("Bal"), v("Am")]);
        assert_eq!(t.to_string(), "Bal+Am");
        let t = f("-", vec![v("A"), f("-", vec![v("B"), v("C")])]);
        assert_eq!(t.to_string(), "A-(B-C)");
    }
}
