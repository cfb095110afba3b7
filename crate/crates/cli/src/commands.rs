use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use chru_core::analysis::{
    check_confluence, check_normal_termination, detect_non_normal_divergence, diff_answers, qa_equal, Status, Verdict,
};
use chru_core::batch;
use chru_core::engine::{Options, StepLabel, Subject};
use chru_core::syntax::{annotate as annotate_program, parse_goal, Goal, Program};
use chru_core::transform::{parse_script, run_sequence, selections, unfold as unfold_rule};

use crate::inputs::{self, classify};
use crate::{exit, CheckKind, Common, Format};

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn with_timing(mut v: Value, common: &Common, start: Instant) -> Value {
    if common.timing {
        v["elapsed_ms"] = json!(start.elapsed().as_millis() as u64);
    }
    v
}

fn bounds(o: &Options) -> Value {
    json!({ "max_depth": o.max_depth, "max_counter": o.max_counter, "strategy": o.strategy })
}

fn annotated(p: Program) -> Program {
    if p.is_annotated() {
        p
    } else {
        annotate_program(&p)
    }
}

fn print_trace(s: &Subject, goal: &Goal, labels: &[StepLabel], o: &Options, indent: &str) -> Result<()> {
    for line in s.trace(goal, labels, o)? {
        println!("{indent}{line}");
    }
    Ok(())
}

pub fn run(program: &Path, args: &[String], replay: Option<&Path>, common: &Common) -> Result<u8> {
    let start = Instant::now();
    let s = inputs::subject(program, common.semantics)?;
    let ins = classify(args, false)?;
    let o = common.options();
    if let Some(w) = replay {
        return replay_witness(&s, &ins.goals, w, &o);
    }
    if ins.goals.is_empty() {
        bail!("no goals given");
    }
    let answers = batch::answers(&s, &ins.goals, &o);
    let outlines =
        if common.trace { batch::outlines(&s, &ins.goals, &o, false) } else { Vec::new() };
    let bound_hit = answers.iter().any(|a| !a.complete());
    match common.format {
        Format::Json => {
            let mut results = Vec::new();
            for (i, (g, a)) in ins.goals.iter().zip(&answers).enumerate() {
                let mut r = json!({
                    "goal": g.to_string(),
                    "answers": a.answers,
                    "failed": a.failed,
                    "cycle": a.cycle,
                    "bound_hit": a.bound_hit,
                });
                if let Some(ol) = outlines.get(i) {
                    let traces: Result<Vec<Vec<String>>> =
                        ol.final_paths.iter().map(|p| Ok(s.trace(g, p, &o)?)).collect();
                    r["derivations"] = json!(traces?);
                }
                results.push(r);
            }
            let v = json!({
                "program": program.display().to_string(),
                "semantics": s.semantics,
                "bounds": bounds(&o),
                "results": results,
            });
            print_json(&with_timing(v, common, start))?;
        }
        Format::Text => {
            for (i, (g, a)) in ins.goals.iter().zip(&answers).enumerate() {
                println!("?- {g}");
                if a.answers.is_empty() {
                    println!("   no answers");
                }
                for ans in &a.answers {
                    println!("   {ans}");
                }
                if a.failed > 0 {
                    println!("   ({} failed final configuration(s))", a.failed);
                }
                if let Some(b) = a.bound_hit {
                    println!("   bound exhausted ({b:?}); answers may be incomplete");
                }
                if let Some(ol) = outlines.get(i) {
                    for (k, path) in ol.final_paths.iter().enumerate() {
                        println!("   derivation {}:", k + 1);
                        print_trace(&s, g, path, &o, "     ")?;
                    }
                }
            }
            if common.timing {
                eprintln!("elapsed: {} ms", start.elapsed().as_millis());
            }
        }
    }
    Ok(if bound_hit && common.strict { exit::BOUND } else { exit::OK })
}

/// Derivations found in a witness file: a list of steps, a witness object
/// or a whole verdict.
fn witness_derivations(v: &Value) -> Result<Vec<(Option<String>, Vec<StepLabel>)>> {
    let labels = |d: &Value| -> Result<Vec<StepLabel>> { Ok(serde_json::from_value(d.clone())?) };
    let from_witness = |w: &Value, goal: Option<String>| -> Result<Vec<(Option<String>, Vec<StepLabel>)>> {
        w["derivations"]
            .as_array()
            .context("witness without derivations")?
            .iter()
            .map(|d| Ok((goal.clone(), labels(d)?)))
            .collect()
    };
    if v.is_array() {
        return Ok(vec![(None, labels(v)?)]);
    }
    if let Some(goals) = v.get("goals").and_then(Value::as_array) {
        let mut out = Vec::new();
        for g in goals {
            if !g["witness"].is_null() {
                out.extend(from_witness(&g["witness"], g["goal"].as_str().map(str::to_string))?);
            }
        }
        return Ok(out);
    }
    from_witness(v, None)
}

fn replay_witness(s: &Subject, goals: &[Goal], path: &Path, o: &Options) -> Result<u8> {
    let v: Value = serde_json::from_str(&inputs::read(path)?).context("witness is not valid JSON")?;
    let ders = witness_derivations(&v)?;
    if ders.is_empty() {
        bail!("the witness contains no derivations");
    }
    for (i, (goal, labels)) in ders.iter().enumerate() {
        let g = match (goal, goals) {
            (Some(text), _) => parse_goal(text).with_context(|| format!("goal `{text}` in witness"))?,
            (None, [g]) => g.clone(),
            (None, _) => bail!("give exactly one goal to replay a bare derivation"),
        };
        println!("derivation {} from ?- {g}", i + 1);
        print_trace(s, &g, labels, o, "  ")?;
    }
    Ok(exit::OK)
}

pub fn annotate(program: &Path, output: Option<&Path>) -> Result<u8> {
    let text = annotate_program(&inputs::program(program)?).to_string();
    match output {
        Some(out) => std::fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?,
        None => print!("{text}"),
    }
    Ok(exit::OK)
}

pub fn unfold(program: &Path, rule: &str, with: &str, ids: Option<&[u32]>, format: Format) -> Result<u8> {
    let p = annotated(inputs::program(program)?);
    let r = p.select(rule).map_err(anyhow::Error::msg)?;
    let v = p.select(with).map_err(anyhow::Error::msg)?;
    let sels = match ids {
        Some(ids) => vec![ids.to_vec()],
        None => selections(&p.rules[r], &p.rules[v]),
    };
    let results: Vec<(Vec<u32>, Result<String, String>)> = sels
        .into_iter()
        .map(|sel| {
            let out = unfold_rule(&p.rules[r], &p.rules[v], &sel).map(|u| u.to_string()).map_err(|e| e.to_string());
            (sel, out)
        })
        .collect();
    let name = &p.rules[v].name;
    match format {
        Format::Json => {
            let items: Vec<Value> = results
                .iter()
                .map(|(sel, out)| match out {
                    Ok(rule) => json!({ "with": name.to_string(), "ids": sel, "rule": rule }),
                    Err(why) => json!({ "with": name.to_string(), "ids": sel, "refusal": why }),
                })
                .collect();
            print_json(&json!(items))?;
        }
        Format::Text => {
            if results.is_empty() {
                println!("no body atoms of `{}` align with the head of `{name}`", p.rules[r].name);
            }
            for (sel, out) in &results {
                let ids: Vec<String> = sel.iter().map(u32::to_string).collect();
                match out {
                    Ok(rule) => println!("{name}@{}: {rule}", ids.join(",")),
                    Err(why) => println!("{name}@{}: refused: {why}", ids.join(",")),
                }
            }
        }
    }
    Ok(if results.iter().any(|(_, o)| o.is_ok()) { exit::OK } else { exit::VIOLATION })
}

pub fn transform(program: &Path, script: &Path, out_dir: &Path, force: bool, format: Format) -> Result<u8> {
    let p = annotated(inputs::program(program)?);
    let steps = parse_script(&inputs::read(script)?).with_context(|| format!("in {}", script.display()))?;
    let rep = run_sequence(&p, &steps, force)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let stem = program.file_stem().and_then(|s| s.to_str()).unwrap_or("program");
    let mut outputs = Vec::new();
    for (i, q) in rep.programs.iter().enumerate() {
        let file = out_dir.join(format!("{stem}-p{i}.achr"));
        std::fs::write(&file, q.to_string()).with_context(|| format!("cannot write {}", file.display()))?;
        outputs.push(file.display().to_string());
    }
    let violated: Vec<usize> = (0..rep.steps.len()).filter(|&i| !rep.steps[i].ok).collect();
    let report = json!({
        "program": program.display().to_string(),
        "script": script.display().to_string(),
        "force": force,
        "steps": rep.steps,
        "stopped_at": rep.stopped_at.map(|i| i + 1),
        "outputs": outputs,
    });
    let report_file = out_dir.join(format!("{stem}-report.json"));
    std::fs::write(&report_file, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("cannot write {}", report_file.display()))?;
    match format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            for (i, st) in rep.steps.iter().enumerate() {
                let verdict = if st.ok { "ok" } else { "violated" };
                println!("step {}: replace {} (mode {}): {verdict}", i + 1, st.name, st.mode);
                for r in &st.reasons {
                    println!("  {r}");
                }
            }
            for o in &outputs {
                println!("wrote {o}");
            }
            println!("wrote {}", report_file.display());
        }
    }
    for &i in &violated {
        let st = &rep.steps[i];
        eprintln!("step {}: {} condition violated for {}: {}", i + 1, st.mode, st.name, st.reasons.join("; "));
    }
    Ok(if violated.is_empty() { exit::OK } else { exit::VIOLATION })
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Holds => exit::OK,
        Status::CounterExample => exit::COUNTER_EXAMPLE,
        Status::Unknown => exit::UNKNOWN,
    }
}

fn print_verdict(v: &Verdict, s: Option<&Subject>, o: &Options, trace: bool) -> Result<()> {
    println!("{}: {:?} ({})", v.check, v.status, v.scope);
    for g in &v.goals {
        println!("  ?- {}: {:?} — {}", g.goal, g.status, g.note);
        let Some(w) = &g.witness else { continue };
        println!("     witness: {}", w.description);
        for c in &w.configs {
            println!("       {c}");
        }
        if let (true, Some(s)) = (trace, s) {
            let goal = parse_goal(&g.goal)?;
            for (k, d) in w.derivations.iter().enumerate() {
                println!("     derivation {}:", k + 1);
                print_trace(s, &goal, d, o, "       ")?;
            }
        }
    }
    Ok(())
}

pub fn check(kind: CheckKind, args: &[String], common: &Common) -> Result<u8> {
    let start = Instant::now();
    let ins = classify(args, true)?;
    let o = common.options();
    let needed = if kind == CheckKind::QaEqual { 2 } else { 1 };
    if ins.programs.len() != needed {
        bail!("{kind:?} needs {needed} program file(s), got {}", ins.programs.len());
    }
    let subjects: Vec<Subject> =
        ins.programs.iter().map(|p| inputs::subject(p, common.semantics)).collect::<Result<_>>()?;
    let verdict = match kind {
        CheckKind::QaEqual => qa_equal(&subjects[0], &subjects[1], &ins.goals, &o).0,
        CheckKind::NormalTermination => check_normal_termination(&subjects[0], &ins.goals, &o),
        CheckKind::Confluence => check_confluence(&subjects[0], &ins.goals, &o),
        CheckKind::Divergence => detect_non_normal_divergence(&subjects[0], &ins.goals, &o),
    };
    match common.format {
        Format::Json => {
            let mut v = serde_json::to_value(&verdict)?;
            v["programs"] = json!(ins.programs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
            v["bounds"] = bounds(&o);
            print_json(&with_timing(v, common, start))?;
        }
        Format::Text => {
            let replayable = (kind != CheckKind::QaEqual).then(|| &subjects[0]);
            print_verdict(&verdict, replayable, &o, common.trace)?;
            if common.timing {
                eprintln!("elapsed: {} ms", start.elapsed().as_millis());
            }
        }
    }
    Ok(status_code(verdict.status))
}

pub fn diff(left: &Path, right: &Path, args: &[String], common: &Common) -> Result<u8> {
    let start = Instant::now();
    let a = inputs::subject(left, common.semantics)?;
    let b = inputs::subject(right, common.semantics)?;
    let ins = classify(args, false)?;
    if ins.goals.is_empty() {
        bail!("no goals given");
    }
    let o = common.options();
    let d = diff_answers(&a, &b, &ins.goals, &o);
    match common.format {
        Format::Json => {
            let v = json!({
                "left": left.display().to_string(),
                "right": right.display().to_string(),
                "bounds": bounds(&o),
                "goals": d.goals,
            });
            print_json(&with_timing(v, common, start))?;
        }
        Format::Text => {
            for g in &d.goals {
                println!("?- {}", g.goal);
                if g.only_left.is_empty() && g.only_right.is_empty() {
                    println!("   same answers ({})", g.left.len());
                }
                for x in &g.only_left {
                    println!("   only in {}: {x}", left.display());
                }
                for x in &g.only_right {
                    println!("   only in {}: {x}", right.display());
                }
                if g.unknown {
                    println!("   bound exhausted; answer sets may be incomplete");
                }
            }
            if common.timing {
                eprintln!("elapsed: {} ms", start.elapsed().as_millis());
            }
        }
    }
    let differs = d.goals.iter().any(|g| !g.only_left.is_empty() || !g.only_right.is_empty());
    Ok(if differs {
        exit::COUNTER_EXAMPLE
    } else if d.any_unknown() {
        if common.strict { exit::BOUND } else { exit::UNKNOWN }
    } else {
        exit::OK
    })
}
