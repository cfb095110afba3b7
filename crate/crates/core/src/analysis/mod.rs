//! Configuration equivalences and bounded property checkers.

pub mod canonical;
mod checks;

pub use canonical::FAILED;
pub use checks::{
    check_confluence, check_normal_termination, cross_equiv, detect_non_normal_divergence, diff_answers, equiv_v_t,
    equiv_v_tprime, qa_equal, sim_equiv, DiffReport, GoalDiff, GoalVerdict, Status, Verdict, Witness,
};
