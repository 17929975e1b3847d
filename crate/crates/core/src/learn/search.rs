//! Optimal hypothesis search by iterative deepening on score.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::logic::{Atom, Program, Rule, Term, TypeRegistry};
use crate::solver::{find_answer_set, SolveError, SolveOptions};

use super::example::{Cdpi, Polarity};
use super::{LearnError, LearningTask};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Hypothesis {
    /// Ids into the space the hypothesis was learned from, ascending.
    pub rule_ids: Vec<usize>,
    pub rules: Vec<Rule>,
    pub score: usize,
}

impl Hypothesis {
    pub fn empty() -> Hypothesis {
        Hypothesis::default()
    }

    pub fn program(&self) -> Program {
        Program::new(self.rules.clone())
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "% score {}", self.score)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LearnOptions {
    /// Largest hypothesis score considered.
    pub max_penalty: usize,
    pub time_budget: Option<Duration>,
    pub solve: SolveOptions,
}

impl Default for LearnOptions {
    fn default() -> LearnOptions {
        LearnOptions { max_penalty: 50, time_budget: None, solve: SolveOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub subsets_tested: usize,
    pub accept_checks: usize,
    /// Subsets rejected because their rules without constraints already
    /// fail a positive example.
    pub pruned: usize,
}

fn collect_constants(t: &Term, out: &mut BTreeSet<Term>) {
    match t {
        Term::Sym(_) | Term::Int(_) => {
            out.insert(t.clone());
        }
        Term::Fn(_, args) => args.iter().for_each(|a| collect_constants(a, out)),
        _ => {}
    }
}

/// Type facts restricted to the constants occurring in `atoms`.
pub fn scoped_registry<'a>(global: &TypeRegistry, atoms: impl IntoIterator<Item = &'a Atom>) -> TypeRegistry {
    let mut consts = BTreeSet::new();
    for a in atoms {
        a.args.iter().for_each(|t| collect_constants(t, &mut consts));
    }
    let mut reg = TypeRegistry::new();
    for (ty, members) in global.types() {
        for c in consts.iter().filter(|c| members.contains(c)) {
            reg.insert(ty.as_str(), c.clone());
        }
    }
    reg
}

/// Whether `program` (background and hypothesis) accepts the example: for a
/// positive example some answer set of `program ∪ context` extends the
/// partial interpretation, for a negative one none does. Guards are answered
/// from `types` restricted to the example's constants.
pub fn accepts(program: &Program, example: &Cdpi, types: &TypeRegistry, opts: &SolveOptions) -> Result<bool, SolveError> {
    let mut full = program.clone();
    full.extend(&example.context);
    let mut opts = opts.clone();
    opts.ground.registry = Some(Arc::new(scoped_registry(types, example.atoms())));
    let witness = find_answer_set(&full, &opts, &mut |i| example.pi.extended_by(i))?;
    Ok(match example.polarity {
        Polarity::Positive => witness.is_some(),
        Polarity::Negative => witness.is_none(),
    })
}

/// A positive and a negative example with the same context where every
/// answer set the positive one needs would violate the negative one.
fn contradictory(examples: &[Cdpi]) -> bool {
    examples.iter().filter(|e| e.polarity == Polarity::Negative).any(|n| {
        examples
            .iter()
            .filter(|p| p.polarity == Polarity::Positive)
            .any(|p| p.context == n.context && n.pi.inc.is_subset(&p.pi.inc) && n.pi.exc.is_subset(&p.pi.exc))
    })
}

struct Checker<'a> {
    task: &'a LearningTask,
    opts: &'a LearnOptions,
    /// Examples in checking order; the last one to reject moves to the front.
    order: Vec<usize>,
    stats: SearchStats,
    /// Whether the constraint-free part of a subset is accepted by every
    /// positive example.
    positive_ok: HashMap<Vec<usize>, bool>,
}

impl Checker<'_> {
    /// Constraints only remove answer sets, so a subset whose other rules
    /// fail a positive example fails it too.
    fn accepts_ids(&mut self, ids: &[usize]) -> bool {
        let space = &self.task.space.rules;
        let normal: Vec<usize> = ids.iter().copied().filter(|&i| !matches!(space[i].rule, Rule::Constraint { .. })).collect();
        if normal.len() < ids.len() && !self.positives_accept(normal) {
            self.stats.pruned += 1;
            return false;
        }
        let rules: Vec<&Rule> = ids.iter().map(|&i| &space[i].rule).collect();
        self.accepts_all(&rules)
    }

    fn positives_accept(&mut self, normal: Vec<usize>) -> bool {
        if let Some(&ok) = self.positive_ok.get(&normal) {
            return ok;
        }
        let mut program = self.task.background.clone();
        program.rules.extend(normal.iter().map(|&i| self.task.space.rules[i].rule.clone()));
        let mut ok = true;
        for e in self.task.examples.iter().filter(|e| e.polarity == Polarity::Positive) {
            self.stats.accept_checks += 1;
            // a solver error proves nothing here
            if !accepts(&program, e, &self.task.types, &self.opts.solve).unwrap_or(true) {
                ok = false;
                break;
            }
        }
        self.positive_ok.insert(normal, ok);
        ok
    }

    fn accepts_all(&mut self, rules: &[&Rule]) -> bool {
        let mut program = self.task.background.clone();
        program.rules.extend(rules.iter().map(|r| (*r).clone()));
        for pos in 0..self.order.len() {
            let idx = self.order[pos];
            self.stats.accept_checks += 1;
            let ok = accepts(&program, &self.task.examples[idx], &self.task.types, &self.opts.solve).unwrap_or_else(|e| {
                log::debug!("candidate rejected on solver error: {e}");
                false
            });
            if !ok {
                self.order[..=pos].rotate_right(1);
                return false;
            }
        }
        true
    }
}

/// Id sequences with the given total cost, in lexicographic order. `costs`
/// must be non-decreasing.
fn subsets(
    costs: &[usize],
    start: usize,
    remaining: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if remaining == 0 {
        return f(cur);
    }
    for id in start..costs.len() {
        if costs[id] > remaining {
            break;
        }
        cur.push(id);
        subsets(costs, id + 1, remaining - costs[id], cur, f)?;
        cur.pop();
    }
    ControlFlow::Continue(())
}

/// An optimal hypothesis: minimal score, ties broken by the lexicographically
/// least id sequence. `Ok(None)` means no hypothesis within `max_penalty`
/// accepts every example.
pub fn solve_task(task: &LearningTask, opts: &LearnOptions) -> Result<Option<Hypothesis>, LearnError> {
    solve_task_with_stats(task, opts).map(|(h, _)| h)
}

pub fn solve_task_with_stats(task: &LearningTask, opts: &LearnOptions) -> Result<(Option<Hypothesis>, SearchStats), LearnError> {
    solve_task_from(task, opts, None)
}

/// [`solve_task_with_stats`] starting at `resume`, a score and id sequence
/// known to precede (in search order) every hypothesis accepting the
/// examples. Adding examples only removes accepted hypotheses, so the
/// previous optimum for a subset of the examples is always such a point.
pub fn solve_task_from(
    task: &LearningTask,
    opts: &LearnOptions,
    resume: Option<(usize, &[usize])>,
) -> Result<(Option<Hypothesis>, SearchStats), LearnError> {
    let start = Instant::now();
    let mut checker =
        Checker { task, opts, order: (0..task.examples.len()).collect(), stats: SearchStats::default(), positive_ok: HashMap::new() };
    if task.examples.is_empty() {
        return Ok((Some(Hypothesis::empty()), checker.stats));
    }
    if contradictory(&task.examples) {
        return Ok((None, checker.stats));
    }
    let costs: Vec<usize> = task.space.rules.iter().map(|r| r.cost).collect();
    debug_assert!(costs.windows(2).all(|w| w[0] <= w[1]), "space ids must be ordered by cost");
    let total: usize = costs.iter().sum();
    let mut timed_out = false;
    let (first_score, from) = resume.unwrap_or((0, &[]));
    for score in first_score..=opts.max_penalty.min(total) {
        let mut found: Option<Vec<usize>> = None;
        let from = if score == first_score { from } else { &[] };
        let _ = subsets(&costs, 0, score, &mut Vec::new(), &mut |ids| {
            if ids < from {
                return ControlFlow::Continue(());
            }
            checker.stats.subsets_tested += 1;
            if checker.stats.subsets_tested.is_multiple_of(64) {
                if let Some(budget) = opts.time_budget {
                    if start.elapsed() > budget {
                        timed_out = true;
                        return ControlFlow::Break(());
                    }
                }
            }
            if checker.accepts_ids(ids) {
                found = Some(ids.to_vec());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if timed_out {
            return Err(LearnError::Timeout { elapsed: start.elapsed(), score_reached: score });
        }
        if let Some(ids) = found {
            let h = Hypothesis { rules: ids.iter().map(|&i| task.space.rules[i].rule.clone()).collect(), rule_ids: ids, score };
            verify(task, &h, opts)?;
            log::info!(
                "learned score {score} after {} subsets ({} accept checks, {} pruned, {:?})",
                checker.stats.subsets_tested,
                checker.stats.accept_checks,
                checker.stats.pruned,
                start.elapsed()
            );
            return Ok((Some(h), checker.stats));
        }
    }
    Ok((None, checker.stats))
}

/// Re-checks a hypothesis against every example from scratch.
pub fn verify(task: &LearningTask, h: &Hypothesis, opts: &LearnOptions) -> Result<(), LearnError> {
    let mut program = task.background.clone();
    program.extend(&h.program());
    for e in &task.examples {
        if !accepts(&program, e, &task.types, &opts.solve)? {
            return Err(LearnError::Unsound { example: e.id.clone() });
        }
    }
    Ok(())
}

/// Learner state threaded through a training run.
#[derive(Debug, Clone)]
pub struct LearnerState {
    pub background: Program,
    pub types: Arc<TypeRegistry>,
    pub examples: Vec<Cdpi>,
    pub hypothesis: Hypothesis,
    /// The space the hypothesis was found in; searches over the same space
    /// resume from it.
    pub space: Option<Arc<crate::bias::HypothesisSpace>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnStep {
    /// The current hypothesis already accepts the example.
    Covered,
    Relearned(SearchStats),
}

impl LearnerState {
    pub fn new(background: Program, types: Arc<TypeRegistry>) -> LearnerState {
        LearnerState { background, types, examples: Vec::new(), hypothesis: Hypothesis::empty(), space: None }
    }

    pub fn program(&self) -> Program {
        let mut p = self.background.clone();
        p.extend(&self.hypothesis.program());
        p
    }
}

/// Adds one example. If the current hypothesis accepts it nothing else
/// changes; otherwise the task over all examples is solved again. When no
/// hypothesis is found the example is dropped and the state is unchanged.
pub fn incremental_learn(
    state: &mut LearnerState,
    space: Arc<crate::bias::HypothesisSpace>,
    example: Cdpi,
    opts: &LearnOptions,
) -> Result<LearnStep, LearnError> {
    if accepts(&state.program(), &example, &state.types, &opts.solve).unwrap_or(false) {
        state.examples.push(example);
        return Ok(LearnStep::Covered);
    }
    let mut examples = state.examples.clone();
    examples.push(example);
    let same_space = state.space.as_ref().is_some_and(|s| Arc::ptr_eq(s, &space) || **s == *space);
    let task = LearningTask { background: state.background.clone(), space, decls: Vec::new(), examples, types: Arc::clone(&state.types) };
    let resume = same_space.then_some((state.hypothesis.score, state.hypothesis.rule_ids.as_slice()));
    match solve_task_from(&task, opts, resume)? {
        (Some(h), stats) => {
            state.examples = task.examples;
            state.hypothesis = h;
            state.space = Some(task.space);
            Ok(LearnStep::Relearned(stats))
        }
        (None, _) => Err(LearnError::NoSolution { max_penalty: opts.max_penalty }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::{enumerate_space, BiasConfig, HypothesisSpace, ModeDecl};
    use crate::ec::sdec_background;
    use crate::learn::example::PartialInterpretation;
    use crate::logic::{parse_atom, parse_program};

    fn types() -> Arc<TypeRegistry> {
        let mut r = TypeRegistry::new();
        for n in ["daniel", "mary"] {
            r.insert("nnp", Term::sym(n));
        }
        for n in ["kitchen", "bedroom", "garden"] {
            r.insert("nn", Term::sym(n));
        }
        Arc::new(r)
    }

    fn daniel_example() -> Cdpi {
        Cdpi::positive(
            "daniel",
            PartialInterpretation::new(
                [parse_atom("holdsAt(be(daniel,bedroom),3)").unwrap()],
                [parse_atom("holdsAt(be(daniel,kitchen),3)").unwrap()],
            ),
            parse_program("time(1..3). happensAt(go_to(daniel,kitchen),1). happensAt(go_to(daniel,bedroom),2).").unwrap(),
        )
    }

    fn daniel_space() -> Arc<HypothesisSpace> {
        let d = ModeDecl::parse_all(
            "#modeb(happensAt(go_to(var(nnp),var(nn)),var(time))).
             #modeb(holdsAt(be(var(nnp),var(nn)),var(time))).
             #modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).
             #modeh(terminatedAt(be(var(nnp),var(nn)),var(time))).",
        )
        .unwrap();
        Arc::new(enumerate_space(&d, &BiasConfig::with_maxv(4)).unwrap())
    }

    fn with_background(rules: &str) -> Program {
        let mut p = sdec_background();
        p.extend(&parse_program(rules).unwrap());
        p
    }

    #[test]
    fn acceptance_of_daniel_example() {
        let opts = SolveOptions::default();
        let init = "initiatedAt(be(V1,V2),V3) :- happensAt(go_to(V1,V2),V3).";
        assert!(!accepts(&with_background(init), &daniel_example(), &types(), &opts).unwrap());
        let both = format!("{init} terminatedAt(be(V1,V2),V3) :- happensAt(go_to(V1,V4),V3), nn(V2).");
        assert!(accepts(&with_background(&both), &daniel_example(), &types(), &opts).unwrap());
    }

    #[test]
    fn empty_program_accepts_consistent_context() {
        let e = Cdpi::positive("e", PartialInterpretation::default(), parse_program("a. b :- a.").unwrap());
        assert!(accepts(&Program::default(), &e, &TypeRegistry::new(), &SolveOptions::default()).unwrap());
        let e = Cdpi::positive("e", PartialInterpretation::default(), parse_program("a. :- a.").unwrap());
        assert!(!accepts(&Program::default(), &e, &TypeRegistry::new(), &SolveOptions::default()).unwrap());
    }

    #[test]
    fn no_examples_gives_empty_hypothesis() {
        let task = LearningTask { background: sdec_background(), space: daniel_space(), decls: vec![], examples: vec![], types: types() };
        assert_eq!(solve_task(&task, &LearnOptions::default()).unwrap(), Some(Hypothesis::empty()));
    }

    #[test]
    fn daniel_task_is_learned() {
        let task = LearningTask {
            background: sdec_background(),
            space: daniel_space(),
            decls: vec![],
            examples: vec![daniel_example()],
            types: types(),
        };
        let h = solve_task(&task, &LearnOptions::default()).unwrap().unwrap();
        let text: Vec<String> = h.rules.iter().map(ToString::to_string).collect();
        assert_eq!(h.score, 3, "{text:?}");
        assert_eq!(
            text,
            [
                "terminatedAt(be(V1,V2),V3) :- nnp(V1), nn(V2), time(V3).",
                "initiatedAt(be(V1,V2),V3) :- happensAt(go_to(V1,V2),V3), nnp(V1), nn(V2), time(V3).",
            ]
        );
    }

    #[test]
    fn contradictory_examples_have_no_solution() {
        let ctx = parse_program("a.").unwrap();
        let pi = PartialInterpretation::new([parse_atom("a").unwrap()], []);
        let task = LearningTask {
            background: Program::default(),
            space: daniel_space(),
            decls: vec![],
            examples: vec![Cdpi::positive("p", pi.clone(), ctx.clone()), Cdpi::negative("n", pi, ctx)],
            types: types(),
        };
        assert_eq!(solve_task(&task, &LearnOptions::default()).unwrap(), None);
    }

    #[test]
    fn incremental_keeps_covered_examples_cheap() {
        let mut state = LearnerState::new(sdec_background(), types());
        let step = incremental_learn(&mut state, daniel_space(), daniel_example(), &LearnOptions::default()).unwrap();
        assert!(matches!(step, LearnStep::Relearned(_)));
        assert_eq!(state.hypothesis.score, 3);
        let before = state.hypothesis.clone();
        let step = incremental_learn(&mut state, daniel_space(), daniel_example(), &LearnOptions::default()).unwrap();
        assert_eq!(step, LearnStep::Covered);
        assert_eq!(state.hypothesis, before);
        assert_eq!(state.examples.len(), 2);
    }

    #[test]
    fn second_story_forces_specific_termination() {
        // Mary's earlier move must survive Daniel's later one
        let mary = Cdpi::positive(
            "mary",
            PartialInterpretation::new(
                [parse_atom("holdsAt(be(mary,garden),4)").unwrap()],
                [parse_atom("holdsAt(be(mary,kitchen),4)").unwrap()],
            ),
            parse_program(
                "time(1..4). happensAt(go_to(mary,kitchen),1). happensAt(go_to(mary,garden),2). \
                 happensAt(go_to(daniel,bedroom),3).",
            )
            .unwrap(),
        );
        let mut state = LearnerState::new(sdec_background(), types());
        let opts = LearnOptions::default();
        incremental_learn(&mut state, daniel_space(), daniel_example(), &opts).unwrap();
        incremental_learn(&mut state, daniel_space(), mary, &opts).unwrap();
        let text: Vec<String> = state.hypothesis.rules.iter().map(ToString::to_string).collect();
        assert_eq!(state.hypothesis.score, 4, "{text:?}");
        assert!(text.contains(&"initiatedAt(be(V1,V2),V3) :- happensAt(go_to(V1,V2),V3), nnp(V1), nn(V2), time(V3).".to_string()));
        for e in &state.examples {
            assert!(accepts(&state.program(), e, &state.types, &SolveOptions::default()).unwrap());
        }
        // resuming from the first optimum finds what a fresh search finds
        let task = LearningTask {
            background: sdec_background(),
            space: daniel_space(),
            decls: vec![],
            examples: state.examples.clone(),
            types: types(),
        };
        assert_eq!(solve_task(&task, &opts).unwrap().unwrap(), state.hypothesis);
    }

    #[test]
    fn time_budget_is_reported() {
        let impossible = Cdpi::positive(
            "x",
            PartialInterpretation::new([parse_atom("holdsAt(be(daniel,garden),3)").unwrap()], []),
            parse_program("time(1..3). happensAt(go_to(daniel,kitchen),1).").unwrap(),
        );
        let task = LearningTask {
            background: sdec_background(),
            space: daniel_space(),
            decls: vec![],
            examples: vec![daniel_example(), impossible],
            types: types(),
        };
        let opts = LearnOptions { time_budget: Some(Duration::from_millis(1)), ..LearnOptions::default() };
        assert!(matches!(solve_task(&task, &opts), Err(LearnError::Timeout { .. })));
    }
}
