use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{Answer, Session};
use crate::nl::Story;

/// Outcome for one question.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub phase: String,
    pub story: usize,
    pub question: String,
    pub predicted: String,
    pub gold: Vec<String>,
    pub correct: bool,
    #[serde(skip)]
    pub answer: Option<Answer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The learner was invoked after this question.
    pub learned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learn_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct PhaseSummary {
    pub questions: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl PhaseSummary {
    fn of(verdicts: &[Verdict]) -> PhaseSummary {
        let correct = verdicts.iter().filter(|v| v.correct).count();
        let accuracy = if verdicts.is_empty() { 0.0 } else { correct as f64 / verdicts.len() as f64 };
        PhaseSummary { questions: verdicts.len(), correct, accuracy }
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Timings {
    pub train_ms: u128,
    pub learn_ms: u128,
    pub test_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub event_calculus: bool,
    pub train: PhaseSummary,
    pub test: PhaseSummary,
    /// Test accuracy.
    pub accuracy: f64,
    pub learned_rules: Vec<String>,
    pub hypothesis_score: usize,
    pub learn_invocations: usize,
    pub learn_failures: usize,
    pub space_lookups: usize,
    pub space_enumerations: usize,
    /// Space cache hits over lookups after the first.
    pub space_hit_rate_after_first: f64,
    pub timings: Timings,
    pub errors: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    /// 0 when every learning call succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.learn_failures > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Trains on `train`, learning from each wrong answer in order, then answers
/// `test` with the hypothesis frozen.
pub fn run_task(session: &mut Session, task: &str, train: &[Story], test: &[Story]) -> Report {
    let start = Instant::now();
    let mut verdicts: Vec<Verdict> = train.iter().flat_map(|s| session.train_story(s)).collect();
    let train_ms = start.elapsed().as_millis();

    let start = Instant::now();
    let frozen = &*session;
    let test_verdicts: Vec<Verdict> = test.par_iter().flat_map_iter(|s| frozen.eval_story(s)).collect();
    let test_ms = start.elapsed().as_millis();

    let train_summary = PhaseSummary::of(&verdicts);
    let test_summary = PhaseSummary::of(&test_verdicts);
    verdicts.extend(test_verdicts);
    let errors: Vec<String> = verdicts
        .iter()
        .flat_map(|v| v.error.iter().chain(&v.learn_error))
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let cache = session.spaces().stats();
    let lookups = cache.hits + cache.misses;
    let hit_rate = if lookups > 1 { cache.hits as f64 / (lookups - 1) as f64 } else { 1.0 };
    let h = session.hypothesis();
    Report {
        task: task.to_string(),
        event_calculus: session.config.ec,
        accuracy: test_summary.accuracy,
        train: train_summary,
        test: test_summary,
        learned_rules: h.rules.iter().map(ToString::to_string).collect(),
        hypothesis_score: h.score,
        learn_invocations: session.stats.learn_invocations,
        learn_failures: session.stats.learn_failures,
        space_lookups: lookups,
        space_enumerations: cache.enumerations,
        space_hit_rate_after_first: hit_rate,
        timings: Timings { train_ms, learn_ms: session.stats.learn_time.as_millis(), test_ms },
        errors,
        verdicts,
    }
}
