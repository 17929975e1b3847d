//! The Daniel task checked exhaustively: no hypothesis scoring below the
//! learner's is an inductive solution, and the learner returns the first
//! solution at its score.

use std::sync::Arc;

use narrasp::bias::{enumerate_space, BiasConfig, HypothesisSpace, ModeDecl};
use narrasp::ec::sdec_background;
use narrasp::learn::{solve_task, Cdpi, LearnOptions, LearningTask, PartialInterpretation};
use narrasp::logic::{parse_atom, parse_program, Program, Rule, Term, TypeRegistry};
use narrasp::solver::{answer_sets, SolveOptions};

const CONTEXT: &str = "time(1..3). happensAt(go_to(daniel,kitchen),1). happensAt(go_to(daniel,bedroom),2).";

fn space() -> HypothesisSpace {
    let d = ModeDecl::parse_all(
        "#modeb(happensAt(go_to(var(nnp),var(nn)),var(time))).
         #modeb(holdsAt(be(var(nnp),var(nn)),var(time))).
         #modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).
         #modeh(terminatedAt(be(var(nnp),var(nn)),var(time))).",
    )
    .unwrap();
    enumerate_space(&d, &BiasConfig::with_maxv(4)).unwrap()
}

/// Definition check: some answer set of background, context, type facts
/// and `rules` contains Daniel in the bedroom and not in the kitchen at 3.
fn is_solution(rules: &[&Rule]) -> bool {
    let mut p = sdec_background();
    p.extend(&parse_program(CONTEXT).unwrap());
    p.extend(&parse_program("nnp(daniel). nn(kitchen). nn(bedroom).").unwrap());
    p.extend(&Program::new(rules.iter().map(|r| (*r).clone()).collect()));
    let inc = parse_atom("holdsAt(be(daniel,bedroom),3)").unwrap();
    let exc = parse_atom("holdsAt(be(daniel,kitchen),3)").unwrap();
    let opts = SolveOptions { bound: usize::MAX, ..SolveOptions::default() };
    answer_sets(&p, &opts).unwrap().answer_sets.iter().any(|s| s.contains(&inc) && !s.contains(&exc))
}

/// Subsets of ids in lexicographic order whose costs sum to exactly `score`.
fn subsets(space: &HypothesisSpace, score: usize, from: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if score == 0 {
        out.push(prefix.clone());
        return;
    }
    for id in from..space.len() {
        let c = space.rules[id].cost;
        if c <= score {
            prefix.push(id);
            subsets(space, score - c, id + 1, prefix, out);
            prefix.pop();
        }
    }
}

/// The learner's hypothesis and its score, or a description of how it
/// falls short.
pub fn check() -> Result<usize, String> {
    let space = space();
    let mut types = TypeRegistry::new();
    types.insert("nnp", Term::sym("daniel"));
    types.insert("nn", Term::sym("kitchen"));
    types.insert("nn", Term::sym("bedroom"));
    let example = Cdpi::positive(
        "daniel",
        PartialInterpretation::new(
            [parse_atom("holdsAt(be(daniel,bedroom),3)").unwrap()],
            [parse_atom("holdsAt(be(daniel,kitchen),3)").unwrap()],
        ),
        parse_program(CONTEXT).unwrap(),
    );
    let task = LearningTask {
        background: sdec_background(),
        space: Arc::new(space.clone()),
        decls: vec![],
        examples: vec![example],
        types: Arc::new(types),
    };
    let h = solve_task(&task, &LearnOptions::default()).map_err(|e| e.to_string())?.ok_or("no solution found")?;

    let mut first = None;
    for score in 0..=h.score {
        let mut all = Vec::new();
        subsets(&space, score, 0, &mut Vec::new(), &mut all);
        for ids in all {
            let rules: Vec<&Rule> = ids.iter().map(|&i| &space.rules[i].rule).collect();
            if is_solution(&rules) {
                if score < h.score {
                    return Err(format!("cheaper solution {ids:?} at score {score}"));
                }
                first.get_or_insert(ids);
            }
        }
    }
    if first.as_deref() != Some(h.rule_ids.as_slice()) {
        return Err(format!("learner returned {:?}, first solution is {first:?}", h.rule_ids));
    }
    Ok(h.score)
}
