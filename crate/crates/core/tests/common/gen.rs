//! Random annotated configurations and their variants.

use std::collections::{BTreeMap, BTreeSet};

use chru_core::builtins::{Builtin, BuiltinStore};
use chru_core::engine::ConfigTPrime;
use chru_core::syntax::{IdAtom, Token, TokenStore};
use chru_core::term::{Atom, Subst, Term, Var};
use proptest::prelude::*;

pub const VARS: [&str; 4] = ["X", "Y", "U", "W"];

pub fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => proptest::sample::select(&VARS[..]).prop_map(Term::var),
        2 => proptest::sample::select(&["a", "b"][..]).prop_map(Term::constant),
        1 => proptest::sample::select(&VARS[..]).prop_map(|v| Term::app("f", vec![Term::var(v)])),
    ]
}

pub fn atom() -> impl Strategy<Value = Atom> {
    prop_oneof![
        term().prop_map(|t| Atom::new("p", vec![t])),
        (term(), term()).prop_map(|(s, t)| Atom::new("q", vec![s, t])),
        Just(Atom::new("r", vec![])),
    ]
}

pub fn builtin() -> impl Strategy<Value = Builtin> {
    (term(), term(), proptest::bool::weighted(0.7))
        .prop_map(|(l, r, eq)| if eq { Builtin::Eq(l, r) } else { Builtin::Neq(l, r) })
}

prop_compose! {
    pub fn config()(
        atoms in proptest::collection::vec(atom(), 0..4),
        store in proptest::collection::vec(builtin(), 0..3),
        pending in proptest::collection::vec(builtin(), 0..2),
        tok_mask in proptest::collection::vec(any::<bool>(), 4),
        first_id in 1u32..4,
    ) -> ConfigTPrime {
        let atoms: Vec<IdAtom> = atoms.into_iter().enumerate()
            .map(|(i, atom)| IdAtom { atom, id: first_id + i as u32 }).collect();
        let mut tokens = TokenStore::new();
        for (w, m) in atoms.windows(2).zip(&tok_mask) {
            if *m {
                tokens.insert(Token::new("r1", vec![w[0].id, w[1].id]));
            }
        }
        if let (Some(a), Some(true)) = (atoms.first(), tok_mask.last()) {
            tokens.insert(Token::new("r2", vec![a.id]));
        }
        let counter = atoms.last().map_or(first_id, |a| a.id);
        ConfigTPrime {
            atoms,
            pending,
            builtins: BuiltinStore::from_atoms(&store),
            tokens,
            counter,
            parked: Vec::new(),
            next_tag: 1,
        }
    }
}

pub fn protected() -> impl Strategy<Value = BTreeSet<Var>> {
    proptest::sample::subsequence(&VARS[..], 0..=VARS.len()).prop_map(|vs| vs.into_iter().map(Var::new).collect())
}

/// A variant of `c` w.r.t. `v`: unprotected variables and identifiers are
/// renamed injectively and the atoms are listed in another order.
pub fn variant(c: &ConfigTPrime, v: &BTreeSet<Var>, id_shift: u32, rotate: usize) -> ConfigTPrime {
    let ren = Subst::from_bindings(
        VARS.iter().map(|n| Var::new(n)).filter(|x| !v.contains(x)).map(|x| {
            let fresh = Term::var(&format!("{}R", x.name));
            (x, fresh)
        }),
    );
    let ids: BTreeMap<u32, u32> = c.atoms.iter().map(|a| (a.id, a.id * 3 + id_shift)).collect();
    let mut atoms: Vec<IdAtom> = c
        .atoms
        .iter()
        .map(|a| IdAtom { atom: a.atom.map_vars(&mut |x| ren.apply(&Term::Var(x.clone()))), id: ids[&a.id] })
        .collect();
    if !atoms.is_empty() {
        let k = rotate % atoms.len();
        atoms.rotate_left(k);
    }
    let rename_b = |b: &Builtin| match b {
        Builtin::Eq(l, r) => Builtin::Eq(ren.apply(l), ren.apply(r)),
        Builtin::Neq(l, r) => Builtin::Neq(ren.apply(l), ren.apply(r)),
        other => other.clone(),
    };
    let store: Vec<Builtin> = c.builtins.to_atoms().iter().map(rename_b).collect();
    ConfigTPrime {
        counter: atoms.iter().map(|a| a.id).max().unwrap_or(0).max(c.counter),
        atoms,
        pending: c.pending.iter().map(rename_b).collect(),
        builtins: BuiltinStore::from_atoms(&store),
        tokens: c
            .tokens
            .iter()
            .map(|t| Token { rule: t.rule.clone(), ids: t.ids.iter().map(|i| ids[i]).collect() })
            .collect(),
        parked: Vec::new(),
        next_tag: 1,
    }
}
