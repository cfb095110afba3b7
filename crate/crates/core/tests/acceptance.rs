//! End-to-end acceptance checks over the fixture corpus.  Prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chru_core::analysis::{
    check_confluence, check_normal_termination, detect_non_normal_divergence, diff_answers, equiv_v_tprime,
    Status,
};
use chru_core::batch;
use chru_core::engine::{Options, Strategy, Subject};
use chru_core::syntax::{annotate, parse_goal, parse_program, strip_annotations, Goal, Program, Rule};
use chru_core::transform::{canonical_rule, parse_script, run_sequence, selections, unfold, unfold_all};
use common::{fixture_goals, fixture_program, fixture_text};
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Program and goal files of the corpus.
const CORPUS: [(&str, &str); 14] = [
    ("chiara.chr", "chiara.goals"),
    ("bank.achr", "bank.goals"),
    ("gen_adam.achr", "gen_adam.goals"),
    ("gen_adam_refined.achr", "gen_adam_refined.goals"),
    ("token.achr", "token.goals"),
    ("mau.achr", "mau.goals"),
    ("matching.achr", "matching.goals"),
    ("unicatesta.achr", "unicatesta.goals"),
    ("safe1.achr", "safe1.goals"),
    ("cofluence.achr", "cofluence.goals"),
    ("ncofluence.achr", "ncofluence.goals"),
    ("termprob.achr", "termprob.goals"),
    ("wconfluence.achr", "wconfluence.goals"),
    ("empty.chr", "empty.goals"),
];

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn goal(s: &str) -> Goal {
    parse_goal(s).unwrap()
}

fn rule(src: &str) -> Rule {
    parse_program(src).unwrap().rules.remove(0)
}

fn same_rule(got: &Rule, want: &str) -> Result<(), String> {
    let want = rule(want);
    ensure!(canonical_rule(got) == canonical_rule(&want), "got `{got}`, want `{want}`");
    Ok(())
}

fn same_program(got: &Program, want: &Program) -> Result<(), String> {
    let g: Vec<String> = got.rules.iter().map(canonical_rule).collect();
    let w: Vec<String> = want.rules.iter().map(canonical_rule).collect();
    ensure!(g == w, "got\n{got}\nwant\n{want}");
    Ok(())
}

fn qa(p: &Program, g: &Goal) -> BTreeSet<String> {
    Subject::annotated(p.clone()).answers(g, &Options::default()).answers
}

fn semantics_equivalence() -> Outcome {
    let start = Instant::now();
    let mut goals = 0;
    for (p, g) in CORPUS {
        let prog = strip_annotations(&fixture_program(p));
        let plain = Subject::plain(prog.clone());
        let ann = Subject::annotated(annotate(&prog));
        let gs = fixture_goals(g);
        let left = batch::answers(&plain, &gs, &Options::default());
        let right = batch::answers(&ann, &gs, &Options::default());
        for ((goal, l), r) in gs.iter().zip(&left).zip(&right) {
            ensure!(l.complete() && r.complete(), "{p} [{goal}]: bound exhausted");
            ensure!(l.answers == r.answers, "{p} [{goal}]: {:?} vs {:?}", l.answers, r.answers);
            goals += 1;
        }
    }
    let elapsed = start.elapsed();
    let secs = elapsed.as_secs_f64();
    ensure!(goals >= 20, "only {goals} goals");
    ensure!(elapsed < Duration::from_secs(10), "took {secs:.2}s");
    Ok(format!("{} programs, {goals} goals, {secs:.2}s", CORPUS.len()))
}

fn unfold_correctness() -> Outcome {
    let (mut unfoldings, mut compared, mut skipped) = (0, 0, 0);
    for (p, g) in CORPUS {
        let prog = annotate(&fixture_program(p));
        let goals = fixture_goals(g);
        let base = Subject::annotated(prog.clone());
        for idx in 0..prog.rules.len() {
            for u in unfold_all(&prog, idx) {
                unfoldings += 1;
                let mut extended = prog.clone();
                extended.rules.push(u.rule.clone());
                let d = diff_answers(&base, &Subject::annotated(extended), &goals, &Options::default());
                ensure!(d.is_empty(), "{p}: adding `{}` changes answers: {:?}", u.rule, d.goals);
                for gd in &d.goals {
                    if gd.unknown {
                        skipped += 1;
                    } else {
                        compared += 1;
                    }
                }
            }
        }
    }
    ensure!(unfoldings > 0, "no unfoldings");
    Ok(format!("{unfoldings} unfolded rules, {compared} goal comparisons ({skipped} bounded out)"))
}

fn golden_unfoldings() -> Outcome {
    let bank = fixture_program("bank.achr");
    let cl1 = unfold(&bank.rules[0], &bank.rules[1], &[2, 4]).map_err(|e| e.to_string())?;
    same_rule(
        &cl1,
        "r1 @ b(Acc1,Bal1), b(Acc2,Bal2), t(Acc1,Acc2,Amount) <=> Acc1!=Acc2 | \
         b(Acc1,Bal1)#1, w(Acc1,Amount)#3, b(Acc,B)#5, B=Bal+Am, Acc2=Acc, Bal2=Bal, Amount=Am.",
    )?;
    let cl2 = unfold(&cl1, &bank.rules[2], &[1, 3]).map_err(|e| e.to_string())?;
    same_rule(
        &cl2,
        "r1 @ b(Acc1,Bal1), b(Acc2,Bal2), t(Acc1,Acc2,Amount) <=> Acc1!=Acc2, Bal1>Amount | \
         b(Acc,B)#5, B=Bal+Am, Acc2=Acc, Bal2=Bal, Amount=Am, b(Acc',B')#6, B'=Bal'-Am', \
         Acc1=Acc', Bal1=Bal', Amount=Am'.",
    )?;

    let g = fixture_program("gen_adam.achr");
    let head = "r1 @ f(X,Y), f(Y,Z), f(Z,W) <=> ";
    let un = |v: usize| unfold(&g.rules[0], &g.rules[v], &[1, 2]).map_err(|e| e.to_string());
    same_rule(&un(1)?, &format!("{head}gs(Z,X)#3, gg(U,T)#4, X=U, Z=V, W=T."))?;
    same_rule(&un(2)?, &format!("{head}g(X,Z)#1, f(Z,W)#2, gs(Z,X)#3, gg(U,T)#4, X=U, Z=V, W=T ; {{r3@1,2}}."))?;
    same_rule(&un(3)?, &format!("{head}g(X,Z)#1, gs(Z,X)#3, gg(J,N)#4, X=J, Z=L, W=N."))?;

    let r = fixture_program("gen_adam_refined.achr");
    let head = "r1 @ f(X,Y), f(Y,Z), f(Z,W) <=> X=adam, Y=seth | ";
    let un = |v: usize| unfold(&r.rules[0], &r.rules[v], &[1, 2]).map_err(|e| e.to_string());
    same_rule(&un(2)?, &format!("{head}g(X,Z)#1, gs(Z,X)#3, Z=enosh, gg(J,N)#4, N=kenan, X=J, Z=L, W=N."))?;
    same_rule(
        &un(1)?,
        &format!("{head}g(X,Z)#1, f(Z,W)#2, gs(Z,X)#3, Z=enosh, gg(U,T)#4, T=kenan, X=U, Z=V, W=T ; {{r2@1,2}}."),
    )?;

    let s = fixture_program("safe1.achr");
    let unf = Program::new(unfold_all(&s, 0).into_iter().map(|u| u.rule).collect());
    let p1 = fixture_program("safe1-p1.achr");
    same_program(&unf, &Program::new(p1.rules[..3].to_vec()))?;
    Ok("bank (2), gen_adam (3), refined (2), safe1 listing (3)".into())
}

fn safe_replacement() -> Outcome {
    let p = fixture_program("safe1.achr");
    let steps = parse_script(&fixture_text("safe1.script")).map_err(|e| e.to_string())?;
    let rep = run_sequence(&p, &steps, false).map_err(|e| e.to_string())?;
    ensure!(rep.stopped_at.is_none(), "sequence stopped at step {:?}", rep.stopped_at);
    ensure!(rep.programs.len() == 3, "{} programs", rep.programs.len());
    same_program(&rep.programs[1], &fixture_program("safe1-p1.achr"))?;
    same_program(&rep.programs[2], &fixture_program("safe1-p2.achr"))?;
    let goals = fixture_goals("safe1.goals");
    let base = Subject::annotated(p);
    for (i, pi) in rep.programs.iter().enumerate().skip(1) {
        let d = diff_answers(&base, &Subject::annotated(pi.clone()), &goals, &Options::default());
        ensure!(!d.any_unknown(), "P_{i}: bound exhausted");
        ensure!(d.is_empty(), "P_{i}: {:?}", d.goals);
    }
    Ok(format!("P_1, P_2 match; answers preserved on {} goals", goals.len()))
}

fn negative_triad() -> Outcome {
    let cases = [
        ("mau.achr", "mau-prime.achr", "p(X)", "X=a"),
        ("matching.achr", "matching-prime.achr", "p(a,R)", "R=b"),
        ("unicatesta.achr", "unicatesta-prime.achr", "p(X), h(a), q(b)", "X=a"),
    ];
    for (p, q, g, lost) in cases {
        let d = diff_answers(
            &Subject::annotated(fixture_program(p)),
            &Subject::annotated(fixture_program(q)),
            &[goal(g)],
            &Options::default(),
        );
        let gd = &d.goals[0];
        ensure!(!gd.unknown, "{p} [{g}]: bound exhausted");
        ensure!(gd.only_left == set(&[lost]), "{p} [{g}]: lost {:?}", gd.only_left);
    }
    Ok("lost X=a, R=b, X=a".into())
}

fn token_soundness() -> Outcome {
    let p = fixture_program("token.achr");
    let h = goal("h");
    ensure!(qa(&p, &h) == set(&["k, s"]), "QA(h) = {:?}", qa(&p, &h));
    // two rounds of adding every unfolding of every rule
    let mut programs = vec![p.clone()];
    let mut cur = p;
    for _ in 0..2 {
        let mut next = cur.clone();
        for idx in 0..cur.rules.len() {
            for u in unfold_all(&cur, idx) {
                if !next.rules.iter().any(|r| canonical_rule(r) == canonical_rule(&u.rule)) {
                    next.rules.push(u.rule.clone());
                }
                let mut replaced = cur.clone();
                replaced.rules[idx] = u.rule;
                programs.push(replaced);
            }
        }
        programs.push(next.clone());
        cur = next;
    }
    for q in &programs {
        let a = Subject::annotated(q.clone()).answers(&h, &Options::default().with_strategy(Strategy::All));
        ensure!(a.complete(), "bound exhausted on\n{q}");
        ensure!(!a.answers.contains("k, q"), "(k, q) reachable in\n{q}");
    }
    Ok(format!("QA(h) = {{k, s}}; (k, q) unreachable in {} programs", programs.len()))
}

fn termination_transfer() -> Outcome {
    let o = Options::default().with_max_depth(1_000);
    let g = [goal("V=d, p(V)")];
    let p = Subject::annotated(fixture_program("termprob.achr"));
    let q = Subject::annotated(fixture_program("termprob-prime.achr"));
    for (name, s) in [("P", &p), ("P'", &q)] {
        let v = check_normal_termination(s, &g, &o);
        ensure!(v.status == Status::Holds, "normal termination of {name}: {:?}", v.status);
    }
    let dp = detect_non_normal_divergence(&p, &g, &o);
    ensure!(dp.status == Status::Holds, "divergence in P: {:?}", dp.status);
    let dq = detect_non_normal_divergence(&q, &g, &o);
    ensure!(dq.status == Status::CounterExample, "divergence in P': {:?}", dq.status);
    Ok("both terminate normally; only P' diverges when Solve is postponed".into())
}

fn weak_replacement() -> Outcome {
    let g = [goal("p(a)")];
    let all = Options::default().with_strategy(Strategy::All);
    for f in ["ncofluence.achr", "ncofluence-p1.achr"] {
        let s = Subject::annotated(fixture_program(f));
        let a = s.answers(&g[0], &all);
        ensure!(a.complete(), "{f}: bound exhausted");
        ensure!(a.answers == set(&["r(b), s(a)"]), "{f}: {:?}", a.answers);
        let c = check_confluence(&s, &g, &Options::default());
        ensure!(c.status == Status::Holds, "{f}: confluence {:?}", c.status);
    }
    let p = check_normal_termination(&Subject::annotated(fixture_program("wconfluence.achr")), &g, &Options::default());
    ensure!(p.status == Status::CounterExample, "P on p(a): {:?}", p.status);
    let q = check_normal_termination(
        &Subject::annotated(fixture_program("wconfluence-prime.achr")),
        &g,
        &Options::default(),
    );
    ensure!(q.status == Status::Holds, "P' on p(a): {:?}", q.status);
    Ok("single answer r(b), s(a) for P and P_1; P cycles, P' terminates".into())
}

/// `Ann(P)` extended with the unfoldings of r2 by r1, r2, r3 and of r4 by r3.
fn chiara_unfolded(p: &Program) -> Program {
    let mut rules = p.rules.clone();
    for (r, with) in [(1usize, vec![0usize, 1, 2]), (3, vec![2])] {
        for v in with {
            for sel in selections(&p.rules[r], &p.rules[v]) {
                if let Ok(u) = unfold(&p.rules[r], &p.rules[v], &sel) {
                    rules.push(u);
                }
            }
        }
    }
    Program::new(rules)
}

fn apply_step_reduction() -> Outcome {
    let g = goal("root(a), same(b,c), edge(a,b), edge(a,d), edge(d,c)");
    let ann = annotate(&fixture_program("chiara.chr"));
    let unfolded = chiara_unfolded(&ann);
    let o = Options::default();
    let (before, _) = Subject::annotated(ann.clone()).min_apply_steps(&g, &o).ok_or("no derivation in Ann(P)")?;
    let (after, _) = Subject::annotated(unfolded.clone()).min_apply_steps(&g, &o).ok_or("no derivation in P'")?;
    ensure!(after < before, "{after} >= {before}");
    ensure!(qa(&ann, &g) == qa(&unfolded, &g), "answers differ");
    Ok(format!("{after} < {before} Apply' steps"))
}

fn oracle_suites() -> Outcome {
    let ent = common::ground::entailment_exhaustive()?;
    ensure!(ent >= 1_000, "{ent} entailment instances");
    let uni = common::ground::unify_exhaustive()?;

    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    let strat = (
        common::gen::config(),
        common::gen::config(),
        common::gen::protected(),
        proptest::collection::vec(proptest::bool::ANY, 4),
        0u32..5,
        0usize..4,
    );
    runner
        .run(&strat, |(a, b, v, mask, shift, rot)| {
            let w: BTreeSet<_> = v.iter().zip(&mask).filter(|(_, m)| **m).map(|(x, _)| x.clone()).collect();
            let a1 = common::gen::variant(&a, &v, shift, rot);
            let a2 = common::gen::variant(&a1, &v, shift + 1, rot + 1);
            let ok = equiv_v_tprime(&a, &a, &v)
                && equiv_v_tprime(&a, &b, &v) == equiv_v_tprime(&b, &a, &v)
                && equiv_v_tprime(&a, &a1, &v)
                && equiv_v_tprime(&a1, &a2, &v)
                && equiv_v_tprime(&a, &a2, &v)
                && equiv_v_tprime(&a, &a1, &w)
                && (!equiv_v_tprime(&a, &b, &v) || equiv_v_tprime(&a, &b, &w));
            proptest::prop_assert!(ok, "law violated for\n{a}\n{b}\nV={v:?}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{ent} entailment instances, {uni} term pairs, 200 configurations"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("semantics equivalence", semantics_equivalence),
        ("unfold correctness", unfold_correctness),
        ("golden unfolded rules", golden_unfoldings),
        ("safe replacement", safe_replacement),
        ("negative triad", negative_triad),
        ("token-store soundness", token_soundness),
        ("normal-termination transfer", termination_transfer),
        ("weak replacement", weak_replacement),
        ("apply-step reduction", apply_step_reduction),
        ("oracle suites", oracle_suites),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = start.elapsed().as_millis();
        match out {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
