//! Unfolding of annotated rules and the replacement of a rule by all its
//! unfoldings.
//!
//! [`unfold`] performs one step.  [`unfold_all`] computes every successful
//! unfolding of a rule with the rules of a program, and [`u_plus`] the
//! corresponding (rule, identifiers) pairs.  [`u_sharp`] searches for the
//! body-atom alignments that could fire at run time but are not covered by
//! an unfolding; it is the decisive ingredient of [`check_replacement`].

mod canonical;
mod script;
mod unfold;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::builtins::{guards_equivalent, Builtin, BuiltinStore};
use crate::syntax::{Program, Rule, Token};
use crate::term::{Atom, Fresh, Var};

pub use canonical::{canonical_rule, normalize_builtins, rules_equivalent};
pub use script::{parse_script, ScriptError, ScriptStep};
pub use unfold::{selections, unfold, Refusal};

/// A successful unfolding: the rule used (index into the program), the
/// identifiers it was matched against and the resulting rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unfolding {
    pub with: usize,
    pub ids: Vec<u32>,
    pub rule: Rule,
}

/// `Unf_P(cl)`: every successful unfolding of `P[idx]` with a rule of `P`,
/// in program order, variants removed.
pub fn unfold_all(p: &Program, idx: usize) -> Vec<Unfolding> {
    let cl = &p.rules[idx];
    let mut out: Vec<Unfolding> = Vec::new();
    let mut seen = BTreeSet::new();
    for (vi, v) in p.rules.iter().enumerate() {
        for sel in selections(cl, v) {
            if let Ok(r) = unfold(cl, v, &sel) {
                if seen.insert(canonical_rule(&r)) {
                    out.push(Unfolding { with: vi, ids: sel, rule: r });
                }
            }
        }
    }
    out
}

/// An entry of `U⁺`: rule index and matched identifiers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Alignment {
    pub rule: usize,
    pub name: String,
    pub ids: Vec<u32>,
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.ids.iter().map(u32::to_string).collect();
        write!(f, "{}@{}", self.name, ids.join(","))
    }
}

/// `U⁺_P(cl)`: all alignments on which unfolding succeeds (before
/// deduplication of the resulting rules).
pub fn u_plus(p: &Program, idx: usize) -> Vec<Alignment> {
    let cl = &p.rules[idx];
    let mut out = Vec::new();
    for (vi, v) in p.rules.iter().enumerate() {
        for sel in selections(cl, v) {
            if unfold(cl, v, &sel).is_ok() {
                out.push(Alignment { rule: vi, name: v.name.to_string(), ids: sel });
            }
        }
    }
    out
}

/// Which clause of the `U#` definition a violation satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// A satisfiable alignment that is not in `U⁺`.
    Uncovered,
    /// A head atom may match a body atom without any full alignment being
    /// guaranteed.
    Partial,
}

/// A member of `U#`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: Clause,
    pub rule: usize,
    pub name: String,
    /// Aligned identifiers (clause `Uncovered`) or the single body
    /// identifier (clause `Partial`).
    pub ids: Vec<u32>,
    pub head_pos: Option<usize>,
    /// The verdict depends on the token store: a would-be witness was
    /// excluded because its token is present.
    pub token_sensitive: bool,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.ids.iter().map(u32::to_string).collect();
        match self.clause {
            Clause::Uncovered => write!(f, "(a) {}@{} may fire but cannot be unfolded", self.name, ids.join(","))?,
            Clause::Partial => write!(
                f,
                "(b) head atom {} of {} may match body atom #{} without a guaranteed full match",
                self.head_pos.map_or(0, |p| p + 1),
                self.name,
                ids.join(",")
            )?,
        }
        if self.token_sensitive {
            write!(f, " [token-dependent]")?;
        }
        Ok(())
    }
}

fn atom_eqs(a: &Atom, b: &Atom) -> Vec<Builtin> {
    a.args.iter().zip(&b.args).map(|(x, y)| Builtin::Eq(x.clone(), y.clone())).collect()
}

fn sat(parts: &[&[Builtin]]) -> bool {
    BuiltinStore::from_atoms(parts.iter().flat_map(|p| p.iter())).satisfiable()
}

/// `U#_P(cl)` for `cl = P[idx]`.
pub fn u_sharp(p: &Program, idx: usize) -> Vec<Violation> {
    let cl = &p.rules[idx];
    let plus: BTreeSet<(usize, Vec<u32>)> = u_plus(p, idx).into_iter().map(|a| (a.rule, a.ids)).collect();
    let body: Vec<(&Atom, u32)> = cl.body_chr().filter_map(|(a, i)| i.map(|i| (a, i))).collect();
    let atom_of = |id: u32| body.iter().find(|(_, i)| *i == id).map(|(a, _)| *a).expect("selected id");
    let d = &cl.guard;
    let none = BTreeSet::new();
    let mut out = Vec::new();

    for (vi, v0) in p.rules.iter().enumerate() {
        let v = unfold::rename_rule_apart(v0, &cl.vars());
        let heads: Vec<&Atom> = v.heads().collect();
        let align_eqs = |ids: &[u32]| -> Vec<Builtin> {
            ids.iter().zip(&heads).flat_map(|(i, h)| atom_eqs(atom_of(*i), h)).collect()
        };
        let token_of = |ids: &[u32]| Token { rule: v.name.clone(), ids: ids.to_vec() };
        let alignments = selections(cl, &v);

        for ids in &alignments {
            if plus.contains(&(vi, ids.clone())) || cl.tokens.contains(&token_of(ids)) {
                continue;
            }
            if sat(&[d, &align_eqs(ids), &v.guard]) {
                out.push(Violation {
                    clause: Clause::Uncovered,
                    rule: vi,
                    name: v.name.to_string(),
                    ids: ids.clone(),
                    head_pos: None,
                    token_sensitive: false,
                });
            }
        }

        for (hp, h) in heads.iter().enumerate() {
            for (k, kid) in &body {
                if !k.same_signature(h) {
                    continue;
                }
                let kh = atom_eqs(k, h);
                if !sat(&[d, &kh, &v.guard]) {
                    continue;
                }
                // The weakest body constraint forcing the partial match:
                // ∃vars(cl_v).(k=h ∧ D'), with cl_v's variables made fresh.
                let vvars: BTreeSet<Var> = v.vars();
                let mut fresh = Fresh::above(cl.vars().iter().chain(vvars.iter()));
                let rho = fresh.renaming(vvars.iter(), &BTreeSet::new());
                let c_rho: Vec<Builtin> =
                    kh.iter().chain(v.guard.iter()).map(|b| crate::term::apply_subst(b, &rho)).collect();
                let e = BuiltinStore::from_atoms(d.iter().chain(&c_rho).chain(&kh));
                let mut found = false;
                let mut blocked = false;
                for ids in &alignments {
                    if e.entails(&none, &align_eqs(ids)) {
                        if cl.tokens.contains(&token_of(ids)) {
                            blocked = true;
                        } else {
                            found = true;
                            break;
                        }
                    }
                }
                if !found {
                    out.push(Violation {
                        clause: Clause::Partial,
                        rule: vi,
                        name: v.name.to_string(),
                        ids: vec![*kid],
                        head_pos: Some(hp),
                        token_sensitive: blocked,
                    });
                }
            }
        }
    }
    out
}

/// The replacement conditions, from weakest to strongest guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weak,
    Safe,
    Nonrec,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "weak" => Ok(Mode::Weak),
            "safe" => Ok(Mode::Safe),
            "nonrec" => Ok(Mode::Nonrec),
            _ => Err(format!("unknown mode `{s}` (expected safe, nonrec or weak)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Weak => "weak",
            Mode::Safe => "safe",
            Mode::Nonrec => "nonrec",
        })
    }
}

/// Outcome of checking whether `P[rule]` may be replaced by its unfoldings.
#[derive(Clone, Debug, Serialize)]
pub struct ReplacementReport {
    pub rule: usize,
    pub name: String,
    pub mode: Mode,
    pub ok: bool,
    pub u_plus: Vec<Alignment>,
    pub u_sharp: Vec<Violation>,
    /// Unfoldings whose guard is not equivalent to the original guard.
    pub guard_changes: Vec<String>,
    pub self_unfoldings: Vec<Alignment>,
    pub reasons: Vec<String>,
    #[serde(serialize_with = "ser_rules")]
    pub unfolded: Vec<Rule>,
}

fn ser_rules<S: serde::Serializer>(rs: &[Rule], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(ToString::to_string))
}

/// Checks the replacement condition `mode` for `P[idx]`.
pub fn check_replacement(p: &Program, idx: usize, mode: Mode) -> ReplacementReport {
    let cl = &p.rules[idx];
    let unf = unfold_all(p, idx);
    let plus = u_plus(p, idx);
    let sharp = if mode == Mode::Weak { Vec::new() } else { u_sharp(p, idx) };
    let guard_changes: Vec<String> =
        unf.iter().filter(|u| !guards_equivalent(&cl.guard, &u.rule.guard)).map(|u| u.rule.to_string()).collect();
    let self_unfoldings: Vec<Alignment> = plus.iter().filter(|a| a.rule == idx).cloned().collect();
    let mut reasons = Vec::new();
    match mode {
        Mode::Weak => {
            if unf.len() == guard_changes.len() {
                reasons.push("no unfolding keeps the guard".to_string());
            }
        }
        Mode::Safe | Mode::Nonrec => {
            if plus.is_empty() {
                reasons.push("the rule has no unfolding".to_string());
            }
            reasons.extend(sharp.iter().map(ToString::to_string));
            reasons.extend(guard_changes.iter().map(|r| format!("guard changed in {r}")));
            if mode == Mode::Nonrec {
                reasons.extend(self_unfoldings.iter().map(|a| format!("self-unfolding in U⁺: {a}")));
            }
        }
    }
    ReplacementReport {
        rule: idx,
        name: cl.name.to_string(),
        mode,
        ok: reasons.is_empty(),
        u_plus: plus,
        u_sharp: sharp,
        guard_changes,
        self_unfoldings,
        reasons,
        unfolded: unf.into_iter().map(|u| u.rule).collect(),
    }
}

/// `P` with `P[idx]` replaced, in place, by `unfolded`.
pub fn replace_with(p: &Program, idx: usize, unfolded: Vec<Rule>) -> Program {
    let mut rules = Vec::with_capacity(p.rules.len() + unfolded.len());
    rules.extend(p.rules[..idx].iter().cloned());
    rules.extend(unfolded);
    rules.extend(p.rules[idx + 1..].iter().cloned());
    Program::new(rules)
}

/// `P` with `P[idx]` replaced by `Unf_P(P[idx])`.  No condition is checked.
pub fn replace(p: &Program, idx: usize) -> Program {
    replace_with(p, idx, unfold_all(p, idx).into_iter().map(|u| u.rule).collect())
}

/// Result of running a replacement script.
#[derive(Clone, Debug)]
pub struct SequenceReport {
    /// `P_0, P_1, …`: the input and the program after every applied step.
    pub programs: Vec<Program>,
    pub steps: Vec<ReplacementReport>,
    /// Index of the step whose condition failed, if any; later steps did
    /// not run.
    pub stopped_at: Option<usize>,
}

/// An error selecting the rule of a script step.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step}: {message}")]
pub struct SequenceError {
    pub step: usize,
    pub message: String,
}

/// Applies `steps` in order.  With `force`, failed conditions are recorded
/// but the replacement is applied anyway.
pub fn run_sequence(p: &Program, steps: &[ScriptStep], force: bool) -> Result<SequenceReport, SequenceError> {
    let mut programs = vec![p.clone()];
    let mut reports = Vec::new();
    for (i, st) in steps.iter().enumerate() {
        let cur = programs.last().expect("non-empty");
        let idx = cur.select(&st.rule).map_err(|message| SequenceError { step: i + 1, message })?;
        let rep = check_replacement(cur, idx, st.mode);
        let ok = rep.ok;
        let next = replace_with(cur, idx, rep.unfolded.clone());
        reports.push(rep);
        if !ok && !force {
            return Ok(SequenceReport { programs, steps: reports, stopped_at: Some(i) });
        }
        programs.push(next);
    }
    Ok(SequenceReport { programs, steps: reports, stopped_at: None })
}
