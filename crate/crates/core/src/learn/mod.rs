//! Learning from answer sets: examples, acceptance, and the search for an
//! optimal hypothesis.

pub mod example;
pub mod search;

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::bias::{BiasError, HypothesisSpace, ModeDecl};
use crate::logic::{Program, TypeRegistry};
use crate::solver::SolveError;

pub use example::{answer_term, make_examples, Cdpi, ExampleSpec, PartialInterpretation, Polarity};
pub use search::{
    accepts, incremental_learn, scoped_registry, solve_task, solve_task_from, solve_task_with_stats, verify, Hypothesis, LearnOptions,
    LearnStep, LearnerState, SearchStats,
};

#[derive(Debug, Clone)]
pub struct LearningTask {
    pub background: Program,
    pub space: Arc<HypothesisSpace>,
    /// The declarations the space came from, kept for export.
    pub decls: Vec<ModeDecl>,
    pub examples: Vec<Cdpi>,
    /// Type facts for guards; each example sees only its own constants.
    pub types: Arc<TypeRegistry>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("learning stopped after {elapsed:?} while searching score {score_reached}")]
    Timeout { elapsed: Duration, score_reached: usize },
    #[error("no hypothesis with score at most {max_penalty} accepts all examples")]
    NoSolution { max_penalty: usize },
    #[error("counting questions need aggregates, which the learner does not support")]
    AggregatesUnsupported,
    #[error("learned hypothesis rejects example {example}")]
    Unsound { example: String },
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// The task in ILASP input syntax, for cross-checking with an external
/// learner.
pub fn export_ilasp(task: &LearningTask, maxv: usize, max_penalty: usize) -> String {
    let mut out = String::new();
    for r in &task.background.rules {
        let _ = writeln!(out, "{r}");
    }
    for r in &task.types.facts().rules {
        let _ = writeln!(out, "{r}");
    }
    out.push('\n');
    for d in &task.decls {
        let _ = writeln!(out, "{d}");
    }
    let _ = writeln!(out, "#maxv({maxv}).\n#max_penalty({max_penalty}).\n");
    for e in &task.examples {
        let _ = writeln!(out, "{e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::sdec_background;
    use crate::logic::{parse_atom, parse_program};

    #[test]
    fn export_contains_all_parts() {
        let decls = ModeDecl::parse_all("#modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).").unwrap();
        let task = LearningTask {
            background: sdec_background(),
            space: Arc::new(HypothesisSpace::default()),
            decls,
            examples: vec![Cdpi::positive(
                "e",
                PartialInterpretation::new([parse_atom("holdsAt(be(daniel,bedroom),3)").unwrap()], []),
                parse_program("time(1..3).").unwrap(),
            )],
            types: Arc::new(TypeRegistry::new()),
        };
        let text = export_ilasp(&task, 4, 50);
        assert!(text.starts_with("holdsAt(F,T+1) :- initiatedAt(F,T), time(T).\n"));
        assert!(text.contains("#modeh(initiatedAt(be(var(nnp),var(nn)),var(time)))."));
        assert!(text.contains("#maxv(4)."));
        assert!(text.contains("#pos({holdsAt(be(daniel,bedroom),3)},{},{time(1..3).})."));
    }
}
