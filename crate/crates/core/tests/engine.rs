mod common;

use std::collections::BTreeSet;

use chru_core::batch;
use chru_core::engine::{BoundKind, Options, StepKind, Strategy, Subject};
use chru_core::syntax::{annotate, parse_goal, parse_program, strip_annotations};
use common::{fixture_goals, fixture_program};

const CHIARA_GOAL: &str = "root(a), same(b,c), edge(a,b), edge(a,d), edge(d,c)";

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn answers(file: &str, goal: &str) -> BTreeSet<String> {
    let s = Subject::annotated(fixture_program(file));
    let a = s.answers(&parse_goal(goal).unwrap(), &Options::default());
    assert!(a.complete(), "{file} {goal}: {:?}", a.bound_hit);
    a.answers
}

#[test]
fn worked_query_reaches_success() {
    let got = answers("chiara-ann.achr", CHIARA_GOAL);
    assert_eq!(got.len(), 1);
    let only = got.iter().next().unwrap();
    assert!(only.contains("success(a)"), "{only}");
    assert_eq!(got, answers("chiara.chr", CHIARA_GOAL));
}

#[test]
fn token_store_blocks_refiring() {
    assert_eq!(answers("token.achr", "h"), set(&["k, s"]));
    assert_eq!(answers("token.achr", "s, s"), set(&["q"]));
}

#[test]
fn guards_on_local_variables() {
    assert_eq!(answers("mau.achr", "p(X)"), set(&["X=a"]));
    assert_eq!(answers("mau.achr", "p(a)"), set(&["true"]));
    assert!(answers("mau.achr", "p(b)").is_empty());
}

#[test]
fn empty_program_answers_are_the_goal_built_ins() {
    assert_eq!(answers("empty.chr", "X=a"), set(&["X=a"]));
    assert!(answers("empty.chr", "X=a, X=b").is_empty());
}

#[test]
fn plain_and_annotated_semantics_agree_on_the_corpus() {
    let pairs = [
        ("chiara.chr", "chiara.goals"),
        ("bank.achr", "bank.goals"),
        ("gen_adam.achr", "gen_adam.goals"),
        ("token.achr", "token.goals"),
        ("mau.achr", "mau.goals"),
        ("matching.achr", "matching.goals"),
        ("ncofluence.achr", "ncofluence.goals"),
        ("termprob.achr", "termprob.goals"),
    ];
    for (p, g) in pairs {
        let prog = strip_annotations(&fixture_program(p));
        let plain = Subject::plain(prog.clone());
        let ann = Subject::annotated(annotate(&prog));
        for goal in fixture_goals(g) {
            let a = plain.answers(&goal, &Options::default());
            let b = ann.answers(&goal, &Options::default());
            assert_eq!(a.answers, b.answers, "{p} [{goal}]");
            // both systems take the same number of Apply steps at best
            assert_eq!(
                plain.min_apply_steps(&goal, &Options::default()).map(|x| x.0),
                ann.min_apply_steps(&goal, &Options::default()).map(|x| x.0),
                "{p} [{goal}]"
            );
        }
    }
}

#[test]
fn witness_paths_replay() {
    let s = Subject::annotated(fixture_program("chiara-ann.achr"));
    let goal = parse_goal(CHIARA_GOAL).unwrap();
    let o = s.outline(&goal, &Options::default(), false);
    assert_eq!(o.final_paths.len(), 1);
    let trace = s.trace(&goal, &o.final_paths[0], &Options::default()).unwrap();
    assert_eq!(trace.len(), o.final_paths[0].len() + 1);
    assert!(trace.last().unwrap().contains("success("), "{}", trace.last().unwrap());

    let mut broken = o.final_paths[0].clone();
    let last = broken.len() - 1;
    broken.swap(0, last);
    assert!(s.trace(&goal, &broken, &Options::default()).is_err());
}

#[test]
fn minimal_apply_derivation_is_replayable() {
    let s = Subject::annotated(fixture_program("chiara-ann.achr"));
    let goal = parse_goal(CHIARA_GOAL).unwrap();
    let (n, path) = s.min_apply_steps(&goal, &Options::default()).unwrap();
    assert_eq!(path.iter().filter(|l| l.kind == StepKind::Apply).count(), n);
    s.trace(&goal, &path, &Options::default()).unwrap();
}

#[test]
fn exploration_is_deterministic() {
    let s = Subject::annotated(fixture_program("gen_adam.achr"));
    let goals = fixture_goals("gen_adam.goals");
    let runs: Vec<Vec<String>> = (0..3)
        .map(|_| {
            batch::outlines(&s, &goals, &Options::default(), false)
                .into_iter()
                .flat_map(|o| o.final_keys.into_iter().chain(o.final_configs))
                .collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
}

#[test]
fn parallel_and_sequential_batches_agree() {
    let s = Subject::annotated(fixture_program("chiara-ann.achr"));
    let goals = fixture_goals("chiara.goals");
    let o = Options::default();
    assert_eq!(batch::answers(&s, &goals, &o), batch::answers_seq(&s, &goals, &o));
}

#[test]
fn bounds_are_reported() {
    let p = parse_program("r1 @ p(X) <=> p(f(X))#1.").unwrap();
    let s = Subject::annotated(p);
    let goal = parse_goal("p(a)").unwrap();
    let a = s.answers(&goal, &Options::default().with_max_depth(50));
    assert_eq!(a.bound_hit, Some(BoundKind::Depth));
    assert!(!a.complete());

    let o = Options { max_counter: 20, ..Options::default() };
    assert_eq!(s.answers(&goal, &o).bound_hit, Some(BoundKind::Counter));

    let o = Options { max_states: 30, ..Options::default() };
    assert_eq!(s.answers(&goal, &o).bound_hit, Some(BoundKind::States));
}

#[test]
fn cycles_are_detected_without_exhausting_bounds() {
    let s = Subject::annotated(fixture_program("wconfluence.achr"));
    let o = s.outline(&parse_goal("p(a)").unwrap(), &Options::default(), true);
    assert!(o.lasso.is_some());
    assert!(o.bound_hit.is_none());
}

#[test]
fn all_interleavings_reach_the_same_answers() {
    for (p, g) in [("token.achr", "token.goals"), ("mau.achr", "mau.goals"), ("ncofluence.achr", "ncofluence.goals")] {
        let s = Subject::annotated(fixture_program(p));
        for goal in fixture_goals(g) {
            let normal = s.answers(&goal, &Options::default());
            let all = s.answers(&goal, &Options::default().with_strategy(Strategy::All));
            assert_eq!(normal.answers, all.answers, "{p} [{goal}]");
        }
    }
}

#[test]
fn deferring_adds_park_steps() {
    let s = Subject::annotated(fixture_program("termprob-prime.achr"));
    let goal = parse_goal("V=d, p(V)").unwrap();
    let o = s.outline(&goal, &Options::default().with_strategy(Strategy::Deferring).with_max_depth(1000), true);
    let l = o.lasso.expect("a cycle once Solve is postponed");
    assert!(l.prefix.iter().chain(&l.cycle).any(|x| x.kind == StepKind::Park));
    let normal = s.outline(&goal, &Options::default().with_max_depth(1000), true);
    assert!(normal.lasso.is_none());
}
