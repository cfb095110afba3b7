//! Brute-force oracles for the built-in solver and for unification.

mod common;

use std::collections::BTreeSet;

use chru_core::builtins::{Builtin, BuiltinStore};
use chru_core::term::{Term, Var};
use common::ground::*;
use proptest::prelude::*;

#[test]
fn entailment_agrees_with_grounding_exhaustively() {
    let n = entailment_exhaustive().unwrap_or_else(|e| panic!("{e}"));
    assert!(n >= 1_000, "{n}");
}

fn arb_term(vars: &'static [&'static str], consts: &'static [&'static str]) -> impl Strategy<Value = Term> {
    prop_oneof![
        proptest::sample::select(vars).prop_map(Term::var),
        proptest::sample::select(consts).prop_map(Term::constant),
    ]
}

fn arb_lit(vars: &'static [&'static str]) -> impl Strategy<Value = Builtin> {
    (arb_term(vars, &["a", "b", "c"]), arb_term(vars, &["a", "b", "c"]), any::<bool>())
        .prop_map(|(l, r, eq)| if eq { Builtin::Eq(l, r) } else { Builtin::Neq(l, r) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn entailment_agrees_with_grounding_random(
        store in proptest::collection::vec(arb_lit(&["X", "Y", "U"]), 0..4),
        body in proptest::collection::vec(arb_lit(&["X", "Y", "W"]), 1..3),
        quantify_w in any::<bool>(),
    ) {
        let quantified: BTreeSet<Var> = if quantify_w { [Var::new("W")].into() } else { BTreeSet::new() };
        let s = BuiltinStore::from_atoms(&store);
        prop_assert_eq!(s.satisfiable(), oracle_sat(&store));
        prop_assert_eq!(s.entails(&quantified, &body), oracle_entails(&store, &quantified, &body));
    }

    #[test]
    fn adding_constraints_is_order_independent(
        lits in proptest::collection::vec(arb_lit(&["X", "Y", "Z"]), 0..5),
    ) {
        let fwd = BuiltinStore::from_atoms(&lits);
        let rev: Vec<Builtin> = lits.iter().rev().cloned().collect();
        let bwd = BuiltinStore::from_atoms(&rev);
        prop_assert_eq!(fwd.satisfiable(), bwd.satisfiable());
        prop_assert!(chru_core::builtins::stores_equivalent(&fwd, &bwd));
    }

    #[test]
    fn store_entails_its_own_atoms(lits in proptest::collection::vec(arb_lit(&["X", "Y", "Z"]), 0..5)) {
        let s = BuiltinStore::from_atoms(&lits);
        prop_assert!(s.entails(&BTreeSet::new(), &lits));
    }
}

#[test]
fn unify_returns_most_general_unifiers() {
    let n = unify_exhaustive().unwrap_or_else(|e| panic!("{e}"));
    assert!(n > 300, "{n}");
}
