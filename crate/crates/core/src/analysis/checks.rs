use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::canonical::{key_t, key_tprime, FAILED};
use crate::batch;
use crate::builtins::stores_equivalent;
use crate::engine::{Answers, ConfigT, ConfigTPrime, Options, Outline, StepKind, StepLabel, Strategy, Subject};
use crate::syntax::{clean, Goal, GoalItem, IdAtom, Token, TokenStore};
use crate::term::{Atom, Var};

/// `σ1 ≡_V σ2` for plain-semantics configurations.
pub fn equiv_v_t(a: &ConfigT, b: &ConfigT, v: &BTreeSet<Var>) -> bool {
    key_t(a, v) == key_t(b, v)
}

/// `σ1 ≡_V σ2` for annotated-semantics configurations.
pub fn equiv_v_tprime(a: &ConfigTPrime, b: &ConfigTPrime, v: &BTreeSet<Var>) -> bool {
    key_tprime(a, v) == key_tprime(b, v)
}

fn sorted<T: Ord + Clone>(xs: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = xs.into_iter().collect();
    v.sort();
    v
}

/// `σ ≈ σ′` across the two transition systems.
///
/// The goal part of `σ` splits into CHR atoms `H1` and built-ins; the
/// built-ins and the built-in stores must coincide, `K = K1 ⊎ K2` with
/// `chr(K1) = H1`, `H2ρ = K2` for an identifier renaming `ρ`, no identifier
/// of `K1` occurs in `T′`, and `Tρ = T′`.
pub fn cross_equiv(s: &ConfigT, s2: &ConfigTPrime) -> bool {
    let h1: Vec<&Atom> = s.goal.iter().filter_map(|g| if let GoalItem::Chr(a) = g { Some(a) } else { None }).collect();
    let pend: Vec<String> =
        sorted(s.goal.iter().filter_map(|g| if let GoalItem::Builtin(b) = g { Some(b.to_string()) } else { None }));
    if pend != sorted(s2.pending.iter().map(ToString::to_string)) {
        return false;
    }
    if s.parked != s2.parked || !stores_equivalent(&s.builtins, &s2.builtins) {
        return false;
    }
    if s.store.len() + h1.len() != s2.atoms.len() {
        return false;
    }
    let mut used = vec![false; s2.atoms.len()];
    let mut rho = BTreeMap::new();
    assign(&s.store, 0, &s2.atoms, &mut used, &mut rho, &mut |used, rho| {
        let k1: Vec<&IdAtom> = s2.atoms.iter().zip(used).filter(|(_, u)| !**u).map(|(a, _)| a).collect();
        if sorted(k1.iter().map(|a| a.atom.clone())) != sorted(h1.iter().map(|a| (*a).clone())) {
            return false;
        }
        let t_ids: BTreeSet<u32> = s2.tokens.iter().flat_map(|t| t.ids.iter().copied()).collect();
        if k1.iter().any(|a| t_ids.contains(&a.id)) {
            return false;
        }
        let renamed: TokenStore = s
            .tokens
            .iter()
            .map(|t| Token { rule: t.rule.clone(), ids: t.ids.iter().map(|i| *rho.get(i).unwrap_or(i)).collect() })
            .collect();
        renamed == s2.tokens
    })
}

/// Called with the atoms used so far and the identifier renaming.
type Accept<'a> = dyn FnMut(&[bool], &BTreeMap<u32, u32>) -> bool + 'a;

fn assign(
    h2: &[IdAtom],
    k: usize,
    atoms: &[IdAtom],
    used: &mut Vec<bool>,
    rho: &mut BTreeMap<u32, u32>,
    accept: &mut Accept<'_>,
) -> bool {
    if k == h2.len() {
        return accept(used, rho);
    }
    for (p, a) in atoms.iter().enumerate() {
        if used[p] || a.atom != h2[k].atom {
            continue;
        }
        used[p] = true;
        rho.insert(h2[k].id, a.id);
        if assign(h2, k + 1, atoms, used, rho, accept) {
            return true;
        }
        rho.remove(&h2[k].id);
        used[p] = false;
    }
    false
}

/// `σ1 ≃ σ2`: both failed, or equal stores, equivalent built-ins and equal
/// cleaned token stores.
pub fn sim_equiv(a: &ConfigTPrime, b: &ConfigTPrime) -> bool {
    let fa = a.builtins.is_inconsistent();
    let fb = b.builtins.is_inconsistent();
    if fa || fb {
        return fa && fb;
    }
    sorted(a.atoms.iter().cloned()) == sorted(b.atoms.iter().cloned())
        && sorted(a.pending.iter().cloned()) == sorted(b.pending.iter().cloned())
        && stores_equivalent(&a.builtins, &b.builtins)
        && clean(&a.ids(), &a.tokens) == clean(&b.ids(), &b.tokens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Holds,
    CounterExample,
    Unknown,
}

/// Replayable evidence: derivations from the goal's initial configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub description: String,
    pub derivations: Vec<Vec<StepLabel>>,
    pub configs: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoalVerdict {
    pub goal: String,
    pub status: Status,
    pub note: String,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    /// The checks are relative to the supplied goals and bounds.
    pub scope: String,
    pub goals: Vec<GoalVerdict>,
}

impl Verdict {
    fn aggregate(check: &str, goals: Vec<GoalVerdict>) -> Verdict {
        let status = if goals.is_empty() {
            Status::Unknown
        } else if goals.iter().any(|g| g.status == Status::CounterExample) {
            Status::CounterExample
        } else if goals.iter().any(|g| g.status == Status::Unknown) {
            Status::Unknown
        } else {
            Status::Holds
        };
        let scope = if goals.is_empty() {
            "no goals supplied".to_string()
        } else {
            format!("{} goal(s), bounded exploration", goals.len())
        };
        Verdict { check: check.to_string(), status, scope, goals }
    }
}

fn bound_note(o: &Outline) -> String {
    format!("bound exhausted ({:?}) after {} states", o.bound_hit.expect("bound"), o.states)
}

fn lasso_witness(o: &Outline, what: &str) -> Witness {
    let l = o.lasso.as_ref().expect("lasso");
    let mut full = l.prefix.clone();
    full.extend(l.cycle.iter().cloned());
    Witness {
        description: format!(
            "{what}: after {} step(s) a cycle of {} step(s) returns to an equivalent configuration",
            l.prefix.len(),
            l.cycle.len()
        ),
        derivations: vec![l.prefix.clone(), full],
        configs: vec![l.key.clone()],
    }
}

fn termination_verdict(o: &Outline, goal: &Goal, what: &str, extra_note: &str) -> GoalVerdict {
    let (status, note, witness) = if o.lasso.is_some() {
        (Status::CounterExample, format!("{what}{extra_note}"), Some(lasso_witness(o, what)))
    } else if o.bound_hit.is_some() {
        (Status::Unknown, bound_note(o), None)
    } else {
        (Status::Holds, format!("all derivations end within bounds ({} states)", o.states), None)
    };
    GoalVerdict { goal: goal.to_string(), status, note, witness }
}

/// No infinite normal derivation from any of `goals` (bounded).
pub fn check_normal_termination(s: &Subject, goals: &[Goal], opts: &Options) -> Verdict {
    let o = opts.clone().with_strategy(Strategy::Normal);
    let outlines = batch::outlines(s, goals, &o, true);
    let gv = goals.iter().zip(&outlines).map(|(g, ol)| termination_verdict(ol, g, "normal derivation cycle", "")).collect();
    Verdict::aggregate("normal-termination", gv)
}

/// Looks for a cycle that becomes possible when built-ins are left unsolved.
pub fn detect_non_normal_divergence(s: &Subject, goals: &[Goal], opts: &Options) -> Verdict {
    let o = opts.clone().with_strategy(Strategy::Deferring);
    let outlines = batch::outlines(s, goals, &o, true);
    let gv = goals
        .iter()
        .zip(&outlines)
        .map(|(g, ol)| {
            let deferred = ol.lasso.as_ref().is_some_and(|l| {
                l.prefix.iter().chain(&l.cycle).any(|x| x.kind == StepKind::Park)
            });
            let extra = if deferred { " (requires postponing Solve)" } else { " (also a normal derivation)" };
            termination_verdict(ol, g, "divergent derivation", extra)
        })
        .collect();
    Verdict::aggregate("divergence", gv)
}

/// Final configurations of all normal derivations are pairwise `≡_V`
/// (`V` the goal's variables); requires normal termination.
pub fn check_confluence(s: &Subject, goals: &[Goal], opts: &Options) -> Verdict {
    let o = opts.clone().with_strategy(Strategy::Normal);
    let outlines = batch::outlines(s, goals, &o, true);
    let gv = goals
        .iter()
        .zip(&outlines)
        .map(|(g, ol)| {
            let goal = g.to_string();
            if ol.lasso.is_some() {
                return GoalVerdict {
                    goal,
                    status: Status::Unknown,
                    note: "not normally terminating: a normal derivation cycles".into(),
                    witness: Some(lasso_witness(ol, "normal derivation cycle")),
                };
            }
            if ol.bound_hit.is_some() {
                return GoalVerdict { goal, status: Status::Unknown, note: bound_note(ol), witness: None };
            }
            let mut keys: Vec<(String, Vec<StepLabel>, String)> = ol
                .final_keys
                .iter()
                .zip(&ol.final_paths)
                .zip(&ol.final_configs)
                .map(|((k, p), c)| (k.clone(), p.clone(), c.clone()))
                .collect();
            if ol.failed > 0 {
                keys.push((FAILED.to_string(), ol.failed_path.clone().unwrap_or_default(), FAILED.to_string()));
            }
            if keys.len() <= 1 {
                GoalVerdict {
                    goal,
                    status: Status::Holds,
                    note: format!("{} final configuration class(es)", keys.len()),
                    witness: None,
                }
            } else {
                let (a, b) = (&keys[0], &keys[1]);
                GoalVerdict {
                    goal,
                    status: Status::CounterExample,
                    note: format!("{} inequivalent final configurations", keys.len()),
                    witness: Some(Witness {
                        description: "two normal derivations with inequivalent final configurations".into(),
                        derivations: vec![a.1.clone(), b.1.clone()],
                        configs: vec![a.2.clone(), b.2.clone()],
                    }),
                }
            }
        })
        .collect();
    Verdict::aggregate("confluence", gv)
}

#[derive(Clone, Debug, Serialize)]
pub struct GoalDiff {
    pub goal: String,
    pub left: BTreeSet<String>,
    pub right: BTreeSet<String>,
    pub only_left: BTreeSet<String>,
    pub only_right: BTreeSet<String>,
    /// True when either side hit a bound (answer sets may be partial).
    pub unknown: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffReport {
    pub goals: Vec<GoalDiff>,
}

impl DiffReport {
    /// No difference on any goal whose exploration completed on both sides.
    pub fn is_empty(&self) -> bool {
        self.goals.iter().all(|g| g.unknown || (g.only_left.is_empty() && g.only_right.is_empty()))
    }

    pub fn any_unknown(&self) -> bool {
        self.goals.iter().any(|g| g.unknown)
    }
}

/// Per-goal comparison of the qualified answers of two programs.
pub fn diff_answers(a: &Subject, b: &Subject, goals: &[Goal], opts: &Options) -> DiffReport {
    let left = batch::answers(a, goals, opts);
    let right = batch::answers(b, goals, opts);
    let goals = goals
        .iter()
        .zip(left.into_iter().zip(right))
        .map(|(g, (l, r)): (&Goal, (Answers, Answers))| GoalDiff {
            goal: g.to_string(),
            only_left: l.answers.difference(&r.answers).cloned().collect(),
            only_right: r.answers.difference(&l.answers).cloned().collect(),
            unknown: !l.complete() || !r.complete(),
            left: l.answers,
            right: r.answers,
        })
        .collect();
    DiffReport { goals }
}

/// Qualified answers coincide on every goal.
pub fn qa_equal(a: &Subject, b: &Subject, goals: &[Goal], opts: &Options) -> (Verdict, DiffReport) {
    let d = diff_answers(a, b, goals, opts);
    let gv = d
        .goals
        .iter()
        .map(|g| {
            let differs = !g.only_left.is_empty() || !g.only_right.is_empty();
            let (status, note) = match (differs, g.unknown) {
                (true, false) => (Status::CounterExample, "answer sets differ".to_string()),
                (_, true) => (Status::Unknown, "bound exhausted; answer sets may be partial".to_string()),
                (false, false) => (Status::Holds, format!("{} answer(s) on both sides", g.left.len())),
            };
            let witness = differs.then(|| Witness {
                description: "answers present on one side only".into(),
                derivations: vec![],
                configs: g.only_left.iter().map(|x| format!("left only: {x}")).chain(
                    g.only_right.iter().map(|x| format!("right only: {x}")),
                ).collect(),
            });
            GoalVerdict { goal: g.goal.clone(), status, note, witness }
        })
        .collect();
    (Verdict::aggregate("qa-equal", gv), d)
}
