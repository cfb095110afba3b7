//! Canonical renaming of variables and identifiers.
//!
//! Objects are flattened into *items* (token sequences).  Items in a fixed
//! prefix keep their order; the rest form a multiset that is printed sorted.
//! Non-protected variables (and optionally identifiers) get canonical names
//! chosen so that the sorted rendering is the same for any two inputs that
//! differ only by such a renaming.  Names are assigned greedily in order of
//! the smallest partially-rendered item; ties between items that share
//! unnamed symbols are resolved by a bounded search for the smallest final
//! rendering.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::term::{is_infix_functor, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Tok {
    Lit(String),
    Var(Var),
    Id(u32),
}

/// One printable item; `alts` are equivalent spellings (e.g. both
/// orientations of an equation) and the smallest rendering wins.
#[derive(Clone, Debug)]
pub(crate) struct Item {
    pub section: u8,
    pub alts: Vec<Vec<Tok>>,
}

impl Item {
    pub fn new(section: u8, toks: Vec<Tok>) -> Self {
        Item { section, alts: vec![toks] }
    }

    /// `l op r` where the order of the two sides is immaterial.
    pub fn symmetric(section: u8, l: Vec<Tok>, op: &str, r: Vec<Tok>) -> Self {
        let mut a = l.clone();
        a.push(Tok::Lit(op.to_string()));
        a.extend(r.iter().cloned());
        let mut b = r;
        b.push(Tok::Lit(op.to_string()));
        b.extend(l);
        Item { section, alts: vec![a, b] }
    }
}

pub(crate) fn lit(out: &mut Vec<Tok>, s: &str) {
    if let Some(Tok::Lit(prev)) = out.last_mut() {
        prev.push_str(s);
    } else {
        out.push(Tok::Lit(s.to_string()));
    }
}

pub(crate) fn push_term(out: &mut Vec<Tok>, t: &Term) {
    match t {
        Term::Var(v) => out.push(Tok::Var(v.clone())),
        Term::App(f, args) if args.is_empty() => lit(out, f),
        Term::App(f, args) if args.len() == 2 && is_infix_functor(f) => {
            push_term(out, &args[0]);
            lit(out, f);
            let paren = matches!(&args[1], Term::App(g, a) if a.len() == 2 && is_infix_functor(g));
            if paren {
                lit(out, "(");
            }
            push_term(out, &args[1]);
            if paren {
                lit(out, ")");
            }
        }
        Term::App(f, args) => {
            lit(out, f);
            lit(out, "(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    lit(out, ",");
                }
                push_term(out, a);
            }
            lit(out, ")");
        }
    }
}

pub(crate) fn term_toks(t: &Term) -> Vec<Tok> {
    let mut v = Vec::new();
    push_term(&mut v, t);
    v
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum S {
    V(Var),
    I(u32),
}

#[derive(Clone, Default)]
struct Names {
    map: HashMap<S, u32>,
    nv: u32,
    ni: u32,
}

impl Names {
    fn name(&mut self, s: &S) {
        if self.map.contains_key(s) {
            return;
        }
        let n = match s {
            S::V(_) => {
                self.nv += 1;
                self.nv
            }
            S::I(_) => {
                self.ni += 1;
                self.ni
            }
        };
        self.map.insert(s.clone(), n);
    }
}

/// Result: for each section, the rendered items (prefix sections in input
/// order, multiset sections sorted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct CanonText {
    pub sections: BTreeMap<u8, Vec<String>>,
}

pub(crate) struct Canonicalizer<'a> {
    pub protected: &'a BTreeSet<Var>,
    pub rename_ids: bool,
    pub budget: usize,
}

struct Ctx<'a> {
    protected: &'a BTreeSet<Var>,
    rename_ids: bool,
    var_prefix: String,
}

impl Ctx<'_> {
    fn sym(&self, t: &Tok) -> Option<S> {
        match t {
            Tok::Var(v) if !self.protected.contains(v) => Some(S::V(v.clone())),
            Tok::Id(i) if self.rename_ids => Some(S::I(*i)),
            _ => None,
        }
    }

    /// Renders one spelling; unnamed symbols become local placeholders and
    /// are reported in order of first appearance.
    fn render(&self, toks: &[Tok], names: &Names) -> (String, Vec<S>) {
        let mut out = String::new();
        let mut local: Vec<S> = Vec::new();
        for t in toks {
            match t {
                Tok::Lit(s) => out.push_str(s),
                Tok::Var(v) => match self.sym(t) {
                    None => {
                        let _ = write!(out, "{v}");
                    }
                    Some(s) => match names.map.get(&s) {
                        Some(n) => {
                            let _ = write!(out, "{}{n}", self.var_prefix);
                        }
                        None => {
                            let k = local.iter().position(|x| *x == s).unwrap_or_else(|| {
                                local.push(s.clone());
                                local.len() - 1
                            });
                            let _ = write!(out, "?{k}");
                        }
                    },
                },
                Tok::Id(i) => match self.sym(t) {
                    None => {
                        let _ = write!(out, "#{i}");
                    }
                    Some(s) => match names.map.get(&s) {
                        Some(n) => {
                            let _ = write!(out, "#{n}");
                        }
                        None => {
                            let k = local.iter().position(|x| *x == s).unwrap_or_else(|| {
                                local.push(s.clone());
                                local.len() - 1
                            });
                            let _ = write!(out, "#?{k}");
                        }
                    },
                },
            }
        }
        (out, local)
    }

    /// Smallest spelling of an item, keyed by section.
    fn key(&self, item: &Item, names: &Names) -> Vec<(String, Vec<S>)> {
        let mut best: Vec<(String, Vec<S>)> = Vec::new();
        for alt in &item.alts {
            let (s, l) = self.render(alt, names);
            let s = format!("{:03}|{s}", item.section);
            match best.first() {
                Some((b, _)) if s > *b => {}
                Some((b, _)) if s == *b => best.push((s, l)),
                _ => best = vec![(s, l)],
            }
        }
        best
    }

    fn final_render(&self, item: &Item, names: &Names) -> String {
        item.alts.iter().map(|a| self.render(a, names).0).min().unwrap_or_default()
    }
}

impl Canonicalizer<'_> {
    pub fn new(protected: &BTreeSet<Var>, rename_ids: bool) -> Canonicalizer<'_> {
        Canonicalizer { protected, rename_ids, budget: 256 }
    }

    pub fn run(&self, prefix: &[Item], items: &[Item]) -> CanonText {
        let depth = self
            .protected
            .iter()
            .map(|v| v.to_string().chars().take_while(|c| *c == '_').count())
            .max()
            .unwrap_or(0);
        let ctx = Ctx {
            protected: self.protected,
            rename_ids: self.rename_ids,
            var_prefix: "_".repeat(depth + 1),
        };
        let mut names = Names::default();
        for it in prefix {
            for t in &it.alts[0] {
                if let Some(s) = ctx.sym(t) {
                    names.name(&s);
                }
            }
        }
        // Symbols shared between several multiset items drive the search;
        // items whose unnamed symbols are all private are independent.
        let syms_of = |it: &Item| -> BTreeSet<String> {
            it.alts[0]
                .iter()
                .filter_map(|t| ctx.sym(t))
                .filter(|s| !names.map.contains_key(s))
                .map(|s| format!("{s:?}"))
                .collect()
        };
        let item_syms: Vec<BTreeSet<String>> = items.iter().map(syms_of).collect();
        let mut occ: HashMap<&String, usize> = HashMap::new();
        for set in &item_syms {
            for s in set {
                *occ.entry(s).or_default() += 1;
            }
        }
        let (shared, private): (Vec<usize>, Vec<usize>) =
            (0..items.len()).partition(|&i| item_syms[i].iter().any(|s| occ[s] > 1));

        let mut leaves = 0usize;
        let mut best: Option<(Vec<String>, Names)> = None;
        self.search(&ctx, items, &shared, shared.clone(), names.clone(), &mut leaves, &mut best);
        let mut names = best.map(|b| b.1).unwrap_or(names);

        let mut keyed: Vec<(String, Vec<S>)> = private
            .iter()
            .map(|&i| ctx.key(&items[i], &names).swap_remove(0))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, syms) in &keyed {
            for s in syms {
                names.name(s);
            }
        }

        let mut sections: BTreeMap<u8, Vec<String>> = BTreeMap::new();
        for it in prefix {
            sections.entry(it.section).or_default().push(ctx.final_render(it, &names));
        }
        let mut rest: BTreeMap<u8, Vec<String>> = BTreeMap::new();
        for it in items {
            rest.entry(it.section).or_default().push(ctx.final_render(it, &names));
        }
        for (s, mut v) in rest {
            v.sort();
            sections.entry(s).or_default().extend(v);
        }
        CanonText { sections }
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        ctx: &Ctx<'_>,
        items: &[Item],
        shared: &[usize],
        mut rem: Vec<usize>,
        mut names: Names,
        leaves: &mut usize,
        best: &mut Option<(Vec<String>, Names)>,
    ) {
        loop {
            if rem.is_empty() {
                *leaves += 1;
                let mut r: Vec<String> = shared
                    .iter()
                    .map(|&i| format!("{:03}|{}", items[i].section, ctx.final_render(&items[i], &names)))
                    .collect();
                r.sort();
                if best.as_ref().is_none_or(|(b, _)| r < *b) {
                    *best = Some((r, names));
                }
                return;
            }
            let keys: Vec<Vec<(String, Vec<S>)>> = rem.iter().map(|&i| ctx.key(&items[i], &names)).collect();
            let min = keys.iter().map(|k| &k[0].0).min().cloned().unwrap_or_default();
            let cands: Vec<(usize, usize)> = keys
                .iter()
                .enumerate()
                .filter(|(_, k)| k[0].0 == min)
                .flat_map(|(p, k)| (0..k.len()).map(move |a| (p, a)))
                .collect();
            let (p0, a0) = cands[0];
            if keys[p0][a0].1.is_empty() {
                let drop: BTreeSet<usize> = cands.iter().map(|c| c.0).collect();
                rem = rem.into_iter().enumerate().filter(|(p, _)| !drop.contains(p)).map(|(_, i)| i).collect();
                continue;
            }
            if cands.len() == 1 {
                for s in &keys[p0][a0].1 {
                    names.name(s);
                }
                rem.remove(p0);
                continue;
            }
            let limit = if *leaves >= self.budget { 1 } else { cands.len() };
            for &(p, a) in cands.iter().take(limit) {
                let mut n2 = names.clone();
                for s in &keys[p][a].1 {
                    n2.name(s);
                }
                let mut r2 = rem.clone();
                r2.remove(p);
                self.search(ctx, items, shared, r2, n2, leaves, best);
            }
            return;
        }
    }
}
