//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when a criterion fails that is not a documented deviation.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use narrasp::bias::{enumerate_space, BiasConfig, ModeDecl, SpaceCache};
use narrasp::corpus;
use narrasp::ec::{sdec_background, timeline};
use narrasp::logic::{parse_program, Atom, Literal, Program, Rule};
use narrasp::nl::{parse_babi, DeterministicParser, Lexicon};
use narrasp::pipeline::{run_task, Answer, Report, Session, SessionConfig};
use narrasp::solver::{answer_sets, SolveOptions, Strategy};

/// Criteria known to fail, with the reason. Their lines still print FAIL.
const DEVIATIONS: [(u8, &str); 1] = [(4, "the optimal Daniel hypothesis scores 3, not 4; see README")];

type Outcome = Result<String, String>;

// 1. Solver against subset enumeration with a definitional reduct check.

fn random_program(rng: &mut ChaCha8Rng) -> (usize, Program) {
    let n = rng.gen_range(1..=12);
    let atom = |i: usize| Atom::prop(&format!("p{i}"));
    let lits = |rng: &mut ChaCha8Rng, k: usize| -> Vec<Literal> {
        (0..k)
            .map(|_| {
                let a = atom(rng.gen_range(0..n));
                if rng.gen_bool(0.4) {
                    Literal::neg(a)
                } else {
                    Literal::pos(a)
                }
            })
            .collect()
    };
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..16) {
        let roll = rng.gen_range(0..10);
        let k = rng.gen_range(0..3);
        let body = lits(rng, k);
        rules.push(match roll {
            0..=5 if body.is_empty() => Rule::Fact(atom(rng.gen_range(0..n))),
            0..=5 => Rule::Normal { head: atom(rng.gen_range(0..n)), body },
            6 => Rule::Constraint { body: lits(rng, k + 1) },
            _ => {
                let heads: BTreeSet<usize> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..n)).collect();
                let m = heads.len() as i64;
                let lower = rng.gen_range(0..=m);
                let upper = rng.gen_range(lower..=m);
                Rule::Choice { lower, upper, heads: heads.into_iter().map(atom).collect(), body }
            }
        });
    }
    (n, Program::new(rules))
}

fn body_true(body: &[Literal], m: &BTreeSet<Atom>) -> bool {
    body.iter().all(|l| m.contains(&l.atom) != l.negated)
}

/// Reduct of `p` with respect to `m`, its least model, and the stability test.
fn is_stable(p: &Program, m: &BTreeSet<Atom>) -> bool {
    let mut positive: Vec<(Atom, Vec<Atom>)> = Vec::new();
    for r in &p.rules {
        match r {
            Rule::Fact(a) => positive.push((a.clone(), vec![])),
            Rule::Normal { head, body } => {
                if body.iter().filter(|l| l.negated).all(|l| !m.contains(&l.atom)) {
                    positive.push((head.clone(), body.iter().filter(|l| !l.negated).map(|l| l.atom.clone()).collect()));
                }
            }
            Rule::Constraint { body } => {
                if body_true(body, m) {
                    return false;
                }
            }
            Rule::Choice { lower, upper, heads, body } => {
                if body_true(body, m) {
                    let k = heads.iter().filter(|h| m.contains(h)).count() as i64;
                    if k < *lower || k > *upper {
                        return false;
                    }
                }
                if body.iter().filter(|l| l.negated).all(|l| !m.contains(&l.atom)) {
                    for h in heads.iter().filter(|h| m.contains(h)) {
                        positive.push((h.clone(), body.iter().filter(|l| !l.negated).map(|l| l.atom.clone()).collect()));
                    }
                }
            }
        }
    }
    let mut least = BTreeSet::new();
    loop {
        let before = least.len();
        for (h, b) in &positive {
            if b.iter().all(|a| least.contains(a)) {
                least.insert(h.clone());
            }
        }
        if least.len() == before {
            break;
        }
    }
    &least == m
}

fn oracle(n: usize, p: &Program) -> BTreeSet<BTreeSet<Atom>> {
    let atoms: Vec<Atom> = (0..n).map(|i| Atom::prop(&format!("p{i}"))).collect();
    (0u32..1 << n)
        .map(|mask| atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect())
        .filter(|m| is_stable(p, m))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let configs = [
        ("default", SolveOptions { bound: usize::MAX, ..SolveOptions::default() }),
        ("propagating", SolveOptions { bound: usize::MAX, strategy: Strategy::Search, exhaustive_open: 0, ..SolveOptions::default() }),
    ];
    let mut disagreements = 0;
    for _ in 0..500 {
        let (n, p) = random_program(&mut rng);
        let want = oracle(n, &p);
        for (_, opts) in &configs {
            let got: BTreeSet<BTreeSet<Atom>> =
                answer_sets(&p, opts).map_err(|e| e.to_string())?.answer_sets.iter().map(|s| s.iter().cloned().collect()).collect();
            if got != want {
                disagreements += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("500 programs, {disagreements} disagreements, {:.1}s", elapsed.as_secs_f64());
    if disagreements == 0 && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 2. The carrying narrative.

fn criterion_2() -> Outcome {
    let mut p = sdec_background();
    p.extend(
        &parse_program(
            "initiatedAt(carry(P,O),T) :- happensAt(got(P,O),T).
             terminatedAt(carry(P,O),T) :- happensAt(drop(P,O),T).
             time(1..7).
             initiatedAt(carry(john,football),1).
             happensAt(go_to(john,kitchen),2).
             happensAt(got(john,apple),3).
             happensAt(go_to(john,park),4).
             happensAt(got(john,baseball),5).
             happensAt(drop(john,football),6).",
        )
        .map_err(|e| e.to_string())?,
    );
    let r = answer_sets(&p, &SolveOptions::default()).map_err(|e| e.to_string())?;
    if r.answer_sets.len() != 1 {
        return Err(format!("{} answer sets", r.answer_sets.len()));
    }
    let tl = timeline(&r.answer_sets[0], 7);
    // Read off the figure: football 2..=6, apple from 4, baseball from 6.
    for t in 1..=8 {
        let mut want = BTreeSet::new();
        for (obj, from, to) in [("football", 2, 6), ("apple", 4, 8), ("baseball", 6, 8)] {
            if (from..=to).contains(&t) {
                want.insert(format!("carry(john,{obj})"));
            }
        }
        let got: BTreeSet<String> = tl.at(t).iter().map(ToString::to_string).collect();
        if got != want {
            return Err(format!("t={t}: got {got:?}, want {want:?}"));
        }
    }
    Ok("one answer set, timeline matches at t=1..8".into())
}

// 3. The propositional mode bias.

/// Rules over atoms a, b, written out by hand from the definition: a head
/// from the head declarations (or none), body literals from the body
/// declarations, no atom twice, and a head atom never in its own body.
fn propositional_oracle() -> BTreeMap<(Option<String>, BTreeSet<String>), usize> {
    let mut out = BTreeMap::new();
    let lits = ["a", "not a", "b", "not b"];
    for head in [None, Some("a"), Some("b")] {
        for mask in 0u32..16 {
            let body: Vec<&str> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| lits[i]).collect();
            let mentions = |x: &str| body.iter().filter(|l| l.trim_start_matches("not ") == x).count();
            if mentions("a") > 1 || mentions("b") > 1 {
                continue;
            }
            if head.is_some_and(|h| mentions(h) > 0) || (head.is_none() && body.is_empty()) {
                continue;
            }
            let cost = body.len() + usize::from(head.is_some());
            out.insert((head.map(String::from), body.iter().map(|s| s.to_string()).collect()), cost);
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let decls = ModeDecl::parse_all("#modeh(a). #modeh(b). #modeb(a). #modeb(b).").map_err(|e| e.to_string())?;
    let space = enumerate_space(&decls, &BiasConfig::default()).map_err(|e| e.to_string())?;
    let got: BTreeMap<(Option<String>, BTreeSet<String>), usize> = space
        .rules
        .iter()
        .map(|c| {
            let head = c.rule.head_atoms().first().map(|a| a.to_string());
            ((head, c.rule.body().iter().map(ToString::to_string).collect()), c.cost)
        })
        .collect();
    let want = propositional_oracle();
    let hist = space.cost_histogram();
    let detail = format!("{} rules, histogram {hist:?}", space.len());
    if got == want && space.len() == 14 && hist == BTreeMap::from([(1, 6), (2, 8)]) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 4. Daniel end to end.

const DANIEL_CDPI: &str = "#pos({holdsAt(be(daniel,bedroom),3)},{holdsAt(be(daniel,kitchen)
    ,3)},{time(1..3). happensAt(go_to(daniel,kitchen),1).
    happensAt(go_to(daniel,bedroom),2).}).";

fn squash(s: &str) -> String {
    s.split_whitespace().collect()
}

fn session(ec: bool) -> Session {
    let lex = Lexicon::default_babi();
    Session::new(SessionConfig::new(ec), lex.clone(), Arc::new(DeterministicParser::new(lex)), Arc::new(SpaceCache::in_memory()))
}

fn criterion_4() -> Outcome {
    let story = parse_babi("1 Daniel went to the kitchen.\n2 Daniel went to the bedroom.\n3 Where is Daniel?\tbedroom\t2\n")
        .map_err(|e| e.to_string())?
        .remove(0);
    let mut s = session(true);
    s.train_story(&story);
    let examples = &s.learner().examples;
    let cdpi_ok = examples.len() == 1 && squash(&examples[0].to_string()) == squash(DANIEL_CDPI);
    let decls: BTreeSet<String> = s.declarations().iter().map(ToString::to_string).collect();
    let want_decls: BTreeSet<String> = [
        "#modeb(happensAt(go_to(var(nnp),var(nn)),var(time))).",
        "#modeb(holdsAt(be(var(nnp),var(nn)),var(time))).",
        "#modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).",
        "#modeh(terminatedAt(be(var(nnp),var(nn)),var(time))).",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let score = s.hypothesis().score;
    let parsed = s.parse_story(&story);
    let answer = s.ask(&parsed, 2).map_err(|e| e.to_string())?;
    let answer_ok = answer == Answer::Values(vec!["bedroom".into()]);
    let detail = format!("CDPI verbatim: {cdpi_ok}, mode bias: {}, score {score} (want 4), answer {answer}", decls == want_decls);
    if cdpi_ok && decls == want_decls && score == 4 && answer_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 5 and 6. Synthetic corpora.

fn run(task: u8, ec: bool) -> Result<(Report, Session, Duration), String> {
    let (train, test) = corpus::split(task, 20, 7).ok_or("no generator")?;
    let mut s = session(ec);
    let start = Instant::now();
    let r = run_task(&mut s, &format!("task{task}"), &train, &test);
    Ok((r, s, start.elapsed()))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for task in [1, 6, 9, 10] {
        let (r, _, elapsed) = run(task, true)?;
        let pass =
            r.train.questions >= 100 && r.test.questions >= 100 && r.test.correct == r.test.questions && elapsed < Duration::from_secs(600);
        ok &= pass;
        lines.push(format!("task {task}: {}/{} test, {:.0}s", r.test.correct, r.test.questions, elapsed.as_secs_f64()));
    }
    let detail = lines.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let (train, _) = corpus::split(1, 20, 7).ok_or("no generator")?;
    let mut s = session(true);
    for story in &train {
        s.train_story(story);
    }
    let first = s.stats.learn_invocations;
    for story in &train {
        s.train_story(story);
    }
    let replay = s.stats.learn_invocations - first;
    let c = s.spaces().stats();
    let lookups = c.hits + c.misses;
    let rate = if lookups > 1 { c.hits as f64 / (lookups - 1) as f64 } else { 1.0 };
    let detail = format!("{first} invocations, {replay} on replay, space hit rate {rate:.2} after the first");
    if first + replay <= 5 && rate >= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 7. Property suites.

fn criterion_7() -> Outcome {
    common::inertia::run_all(256).map_err(|e| format!("inertia: {e}"))?;
    common::unification::run_all(512).map_err(|e| format!("unification: {e}"))?;
    let score = common::daniel::check().map_err(|e| format!("Daniel optimality: {e}"))?;
    Ok(format!("inertia, unification and Daniel optimality (score {score}) hold"))
}

// 8. Unsolvable tasks fail loudly.

fn criterion_8() -> Outcome {
    let mut lines = Vec::new();
    for (task, expected) in
        [(2, "hypothesis space too large"), (3, "hypothesis space too large"), (5, "hypothesis space too large"), (7, "aggregates")]
    {
        let (r, _, _) = run(task, true)?;
        let failures: Vec<&String> = r.verdicts.iter().filter_map(|v| v.learn_error.as_ref()).collect();
        if failures.is_empty() || failures.iter().any(|e| !e.contains(expected)) {
            return Err(format!("task {task}: learn errors {failures:?}"));
        }
        let silent = r.verdicts.iter().filter(|v| !v.correct && v.error.is_none() && v.learn_error.is_none()).count();
        if silent > 0 {
            return Err(format!("task {task}: {silent} wrong answers without an error"));
        }
        if r.exit_code() == 0 {
            return Err(format!("task {task}: exit code 0"));
        }
        lines.push(format!("task {task}: {} rejected ({expected})", failures.len()));
    }
    Ok(lines.join("; "))
}

fn main() {
    // Honour `cargo test -- --list` and filters without running everything.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(u8, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut unexpected = 0;
    for (n, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(detail) => match DEVIATIONS.iter().find(|(d, _)| *d == n) {
                Some((_, why)) => println!("criterion {n}: FAIL  {detail} [known deviation: {why}]"),
                None => {
                    println!("criterion {n}: FAIL  {detail}");
                    unexpected += 1;
                }
            },
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
