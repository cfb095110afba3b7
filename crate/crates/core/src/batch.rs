//! Per-goal batch evaluation.
//!
//! Goals are independent, so with the `parallel` feature they are spread
//! over the rayon pool; results always come back in input order.  The
//! `*_seq` variants never spawn threads.

use crate::engine::{Answers, Options, Outline, Subject};
use crate::syntax::Goal;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn answers_seq(s: &Subject, goals: &[Goal], opts: &Options) -> Vec<Answers> {
    goals.iter().map(|g| s.answers(g, opts)).collect()
}

pub fn outlines_seq(s: &Subject, goals: &[Goal], opts: &Options, stop_on_lasso: bool) -> Vec<Outline> {
    goals.iter().map(|g| s.outline(g, opts, stop_on_lasso)).collect()
}

#[cfg(feature = "parallel")]
pub fn answers(s: &Subject, goals: &[Goal], opts: &Options) -> Vec<Answers> {
    goals.par_iter().map(|g| s.answers(g, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn answers(s: &Subject, goals: &[Goal], opts: &Options) -> Vec<Answers> {
    answers_seq(s, goals, opts)
}

#[cfg(feature = "parallel")]
pub fn outlines(s: &Subject, goals: &[Goal], opts: &Options, stop_on_lasso: bool) -> Vec<Outline> {
    goals.par_iter().map(|g| s.outline(g, opts, stop_on_lasso)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn outlines(s: &Subject, goals: &[Goal], opts: &Options, stop_on_lasso: bool) -> Vec<Outline> {
    outlines_seq(s, goals, opts, stop_on_lasso)
}

/// Maps `f` over `items`, in parallel when the feature is enabled.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}
