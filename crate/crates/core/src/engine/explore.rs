//! Bounded exhaustive exploration with cycle (lasso) detection.
//!
//! Configurations are identified by their canonical `≡_V` text, `V` being
//! the variables of the initial goal.  A depth-first search keeps the keys
//! on the current branch (to find lassos) and the keys whose subtrees were
//! fully explored (to avoid repeating work).

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::{Options, StepKind, StepLabel, System};
use crate::term::Var;

fn hash128(s: &str) -> u128 {
    let mut a = DefaultHasher::new();
    s.hash(&mut a);
    let mut b = DefaultHasher::new();
    (0x9e37_79b9_7f4a_7c15u64, s).hash(&mut b);
    ((a.finish() as u128) << 64) | b.finish() as u128
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    Depth,
    Counter,
    States,
    Memory,
}

/// A reachable cycle: `prefix` leads to a configuration that `cycle`
/// returns to (up to `≡_V`).
#[derive(Clone, Debug, Serialize)]
pub struct Lasso {
    pub prefix: Vec<StepLabel>,
    pub cycle: Vec<StepLabel>,
    pub key: String,
}

#[derive(Clone, Debug)]
pub struct Final<C> {
    pub key: String,
    pub config: C,
    pub path: Vec<StepLabel>,
}

#[derive(Clone, Debug)]
pub struct Exploration<C> {
    /// Distinct (up to `≡_V`) final, non-failed configurations.
    pub finals: Vec<Final<C>>,
    /// Number of failed leaves met (after memoisation).
    pub failed: usize,
    pub failed_path: Option<Vec<StepLabel>>,
    pub lasso: Option<Lasso>,
    pub bound_hit: Option<BoundKind>,
    pub states: usize,
}

struct Frame<C> {
    hash: u128,
    pending: std::vec::IntoIter<(StepLabel, C)>,
    tainted: bool,
}

/// Explores every derivation from `init` allowed by `opts`.
///
/// With `stop_on_lasso` the search ends at the first cycle found.
pub fn explore<S: System>(
    sys: &S,
    init: S::Config,
    protected: &BTreeSet<Var>,
    opts: &Options,
    stop_on_lasso: bool,
) -> Exploration<S::Config> {
    let mut ex = Exploration { finals: Vec::new(), failed: 0, failed_path: None, lasso: None, bound_hit: None, states: 0 };
    let mut final_keys: HashSet<u128> = HashSet::new();
    let mut done: HashSet<u128> = HashSet::new();
    let mut on_path: HashMap<u128, usize> = HashMap::new();
    let mut frames: Vec<Frame<S::Config>> = Vec::new();
    let mut path: Vec<StepLabel> = Vec::new();
    let mut retained = 0usize;

    // Returns Some(frame) when the configuration must be expanded, and
    // Err(global) when a bound is hit; global bounds end the search.
    let mut visit = |c: S::Config,
                     path: &[StepLabel],
                     depth: usize,
                     ex: &mut Exploration<S::Config>,
                     on_path: &HashMap<u128, usize>,
                     done: &mut HashSet<u128>,
                     retained: &mut usize|
     -> Result<Option<Frame<S::Config>>, bool> {
        let key = sys.key(&c, protected);
        let h = hash128(&format!("{key}\u{1}{}", sys.pending(&c)));
        if let Some(&at) = on_path.get(&h) {
            if ex.lasso.is_none() {
                ex.lasso = Some(Lasso { prefix: path[..at].to_vec(), cycle: path[at..].to_vec(), key });
            }
            return Ok(None);
        }
        if done.contains(&h) {
            return Ok(None);
        }
        if sys.is_failed(&c) {
            ex.failed += 1;
            if ex.failed_path.is_none() {
                ex.failed_path = Some(path.to_vec());
            }
            done.insert(h);
            return Ok(None);
        }
        let bound = if depth >= opts.max_depth {
            Some(BoundKind::Depth)
        } else if sys.counter(&c) > opts.max_counter {
            Some(BoundKind::Counter)
        } else if ex.states >= opts.max_states {
            Some(BoundKind::States)
        } else {
            None
        };
        if let Some(b) = bound {
            ex.bound_hit.get_or_insert(b);
            return Err(b == BoundKind::States);
        }
        ex.states += 1;
        let succ = sys.successors(&c, opts);
        if succ.is_empty() {
            if final_keys.insert(h) {
                ex.finals.push(Final { key, config: c, path: path.to_vec() });
            }
            done.insert(h);
            return Ok(None);
        }
        let size: usize = succ.iter().map(|(_, c)| sys.size(c)).sum();
        if *retained + size > opts.max_retained {
            ex.bound_hit.get_or_insert(BoundKind::Memory);
            return Err(true);
        }
        *retained += size;
        Ok(Some(Frame { hash: h, pending: succ.into_iter(), tainted: false }))
    };

    match visit(init, &path, 0, &mut ex, &on_path, &mut done, &mut retained) {
        Ok(Some(f)) => {
            on_path.insert(f.hash, 0);
            frames.push(f);
        }
        Ok(None) | Err(_) => return ex,
    }

    while let Some(top) = frames.last_mut() {
        if stop_on_lasso && ex.lasso.is_some() {
            break;
        }
        match top.pending.next() {
            Some((label, child)) => {
                retained -= sys.size(&child);
                path.push(label);
                let depth = path.len();
                match visit(child, &path, depth, &mut ex, &on_path, &mut done, &mut retained) {
                    Ok(Some(f)) => {
                        on_path.insert(f.hash, depth);
                        frames.push(f);
                        continue;
                    }
                    Ok(None) => {}
                    Err(global) => {
                        // Exhausting a global budget ends the whole search.
                        if global {
                            break;
                        }
                        if let Some(t) = frames.last_mut() {
                            t.tainted = true;
                        }
                    }
                }
                path.pop();
            }
            None => {
                let f = frames.pop().expect("non-empty");
                on_path.remove(&f.hash);
                if f.tainted {
                    if let Some(parent) = frames.last_mut() {
                        parent.tainted = true;
                    }
                } else {
                    done.insert(f.hash);
                }
                path.pop();
            }
        }
    }
    ex
}

/// Qualified answers of one goal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Answers {
    pub answers: BTreeSet<String>,
    pub bound_hit: Option<BoundKind>,
    pub cycle: bool,
    pub failed: usize,
}

impl Answers {
    pub fn complete(&self) -> bool {
        self.bound_hit.is_none()
    }
}

pub fn qualified_answers<S: System>(sys: &S, init: S::Config, goal_vars: &BTreeSet<Var>, opts: &Options) -> Answers {
    let ex = explore(sys, init, goal_vars, opts, false);
    Answers {
        answers: ex.finals.iter().map(|f| sys.answer(&f.config, goal_vars)).collect(),
        bound_hit: ex.bound_hit,
        cycle: ex.lasso.is_some(),
        failed: ex.failed,
    }
}

/// Fewest Apply steps of any derivation ending in a non-failed final
/// configuration, with one such derivation; 0-1 breadth-first search.
pub fn min_apply_steps<S: System>(
    sys: &S,
    init: S::Config,
    protected: &BTreeSet<Var>,
    opts: &Options,
) -> Option<(usize, Vec<StepLabel>)> {
    let mut best: BTreeMap<u128, usize> = BTreeMap::new();
    let mut queue: VecDeque<(usize, S::Config, Vec<StepLabel>)> = VecDeque::new();
    best.insert(hash128(&sys.node_id(&init, protected)), 0);
    queue.push_back((0, init, Vec::new()));
    let mut expanded = 0usize;
    while let Some((cost, c, path)) = queue.pop_front() {
        let h = hash128(&sys.node_id(&c, protected));
        if best.get(&h).is_some_and(|&b| b < cost) {
            continue;
        }
        if sys.is_failed(&c) {
            continue;
        }
        expanded += 1;
        if expanded > opts.max_states || path.len() >= opts.max_depth {
            continue;
        }
        let succ = sys.successors(&c, opts);
        if succ.is_empty() {
            // 0-1 BFS pops in non-decreasing cost order.
            return Some((cost, path));
        }
        for (l, n) in succ {
            let w = usize::from(l.kind == StepKind::Apply);
            let nc = cost + w;
            let nh = hash128(&sys.node_id(&n, protected));
            if best.get(&nh).is_some_and(|&b| b <= nc) {
                continue;
            }
            best.insert(nh, nc);
            let mut p = path.clone();
            p.push(l);
            if w == 0 {
                queue.push_front((nc, n, p));
            } else {
                queue.push_back((nc, n, p));
            }
        }
    }
    None
}
