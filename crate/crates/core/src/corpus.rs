//! Seeded generators for bAbI-style stories. Gold answers come from a direct
//! simulation of the world state, not from the reasoner.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::nl::{parse_babi, Story};

pub const ACTORS: [&str; 4] = ["mary", "john", "daniel", "sandra"];
pub const PLACES: [&str; 6] = ["kitchen", "bedroom", "bathroom", "hallway", "garden", "office"];
pub const OBJECTS: [&str; 3] = ["football", "apple", "milk"];
const MOVES: [&str; 5] = ["went to", "moved to", "journeyed to", "travelled to", "went back to"];
const GETS: [&str; 3] = ["got", "picked up", "grabbed"];
const DROPS: [&str; 3] = ["dropped", "discarded", "put down"];
const GIVES: [&str; 3] = ["gave", "handed", "passed"];

/// Tasks with a generator.
pub const TASKS: [u8; 8] = [1, 2, 3, 5, 6, 7, 9, 10];

/// Questions per story.
pub const QUESTIONS_PER_STORY: usize = 5;

fn cap(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

struct Writer {
    text: String,
    line: usize,
}

impl Writer {
    fn statement(&mut self, s: &str) -> usize {
        self.line += 1;
        let _ = writeln!(self.text, "{} {}", self.line, s);
        self.line
    }

    fn question(&mut self, q: &str, answer: &str, support: &[usize]) {
        self.line += 1;
        let sup: Vec<String> = support.iter().map(ToString::to_string).collect();
        let _ = writeln!(self.text, "{} {}\t{}\t{}", self.line, q, answer, sup.join(" "));
    }
}

#[derive(Default, Clone)]
struct World {
    /// Possible locations of each actor; one entry when known.
    at: BTreeMap<&'static str, (Vec<&'static str>, usize)>,
    /// Holder of each object, or the place it lies.
    object: BTreeMap<&'static str, Holder>,
    /// Places each object has been, in order, for "before" questions.
    trail: BTreeMap<&'static str, Vec<(&'static str, usize)>>,
    gave: Vec<(&'static str, &'static str, &'static str, usize)>,
}

#[derive(Clone, Copy)]
enum Holder {
    Actor(&'static str, usize),
    Place(&'static str, usize),
}

impl World {
    fn place_of(&self, actor: &str) -> Option<&'static str> {
        self.at.get(actor).and_then(|(p, _)| (p.len() == 1).then(|| p[0]))
    }

    fn object_place(&self, o: &str) -> Option<(&'static str, usize)> {
        match *self.object.get(o)? {
            Holder::Place(p, l) => Some((p, l)),
            Holder::Actor(a, _) => self.place_of(a).map(|p| (p, self.at[a].1)),
        }
    }

    fn move_to(&mut self, actor: &'static str, place: &'static str, line: usize) {
        self.at.insert(actor, (vec![place], line));
        let carried: Vec<&'static str> =
            self.object.iter().filter(|(_, h)| matches!(h, Holder::Actor(a, _) if *a == actor)).map(|(o, _)| *o).collect();
        for o in carried {
            let t = self.trail.entry(o).or_default();
            if t.last().map(|x| x.0) != Some(place) {
                t.push((place, line));
            }
        }
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    *items.choose(rng).expect("non-empty choice")
}

fn other_place(rng: &mut ChaCha8Rng, not: &[&str]) -> &'static str {
    let pool: Vec<&'static str> = PLACES.iter().copied().filter(|p| !not.contains(p)).collect();
    pick(rng, &pool)
}

fn movement(rng: &mut ChaCha8Rng, w: &mut World, out: &mut Writer) -> &'static str {
    let actor = pick(rng, &ACTORS);
    let current = w.place_of(actor);
    let place = other_place(rng, &current.into_iter().collect::<Vec<_>>());
    let line = out.statement(&format!("{} {} the {}.", cap(actor), pick(rng, &MOVES), place));
    w.move_to(actor, place, line);
    actor
}

/// Task 1: single supporting fact, "Where is X?".
fn where_is(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        let mut moved = vec![movement(rng, &mut w, out), movement(rng, &mut w, out)];
        moved.dedup();
        let actor = pick(rng, &moved);
        let (places, line) = &w.at[actor];
        out.question(&format!("Where is {}?", cap(actor)), places[0], &[*line]);
    }
}

fn yes_no(rng: &mut ChaCha8Rng, w: &World, actor: &'static str, out: &mut Writer) {
    let (places, line) = w.at[actor].clone();
    let place = match rng.gen_range(0..3) {
        0 if places.len() > 1 => pick(rng, &places),
        0 | 1 if !places.is_empty() => pick(rng, &places),
        _ => other_place(rng, &places),
    };
    let answer = if places == [place] {
        "yes"
    } else if places.contains(&place) {
        "maybe"
    } else {
        "no"
    };
    out.question(&format!("Is {} in the {}?", cap(actor), place), answer, &[line]);
}

/// Task 6: yes/no questions over movements.
fn is_in(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        let moved = [movement(rng, &mut w, out), movement(rng, &mut w, out)];
        let actor = pick(rng, &moved);
        yes_no(rng, &w, actor, out);
    }
}

/// Task 9: movements, "is in" and negated location statements.
fn negation(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        let mut mentioned = Vec::new();
        for _ in 0..2 {
            let roll = rng.gen_range(0..4);
            let actor = pick(rng, &ACTORS);
            match (roll, w.place_of(actor)) {
                (0, _) => {
                    let place = other_place(rng, &[]);
                    let line = out.statement(&format!("{} is in the {}.", cap(actor), place));
                    w.move_to(actor, place, line);
                    mentioned.push(actor);
                }
                (1, Some(place)) => {
                    let phrase = if rng.gen_bool(0.5) { "is not in" } else { "is no longer in" };
                    let line = out.statement(&format!("{} {} the {}.", cap(actor), phrase, place));
                    w.at.insert(actor, (vec![], line));
                    mentioned.push(actor);
                }
                _ => mentioned.push(movement(rng, &mut w, out)),
            }
        }
        let actor = pick(rng, &mentioned);
        yes_no(rng, &w, actor, out);
    }
}

/// Task 10: movements, "is in" and "either ... or" statements.
fn indefinite(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        let mut mentioned = Vec::new();
        for _ in 0..2 {
            let actor = pick(rng, &ACTORS);
            match rng.gen_range(0..5) {
                0 => {
                    let place = other_place(rng, &[]);
                    let line = out.statement(&format!("{} is in the {}.", cap(actor), place));
                    w.move_to(actor, place, line);
                    mentioned.push(actor);
                }
                1 | 2 => {
                    let a = other_place(rng, &[]);
                    let b = other_place(rng, &[a]);
                    let line = out.statement(&format!("{} is either in the {} or the {}.", cap(actor), a, b));
                    w.at.insert(actor, (vec![a, b], line));
                    mentioned.push(actor);
                }
                _ => mentioned.push(movement(rng, &mut w, out)),
            }
        }
        let actor = pick(rng, &mentioned);
        yes_no(rng, &w, actor, out);
    }
}

/// One statement for the object tasks: a move, or picking up or dropping an
/// object where the actor is.
fn object_statement(rng: &mut ChaCha8Rng, w: &mut World, out: &mut Writer) {
    let actor = pick(rng, &ACTORS);
    let here = w.place_of(actor);
    let held: Vec<&'static str> =
        OBJECTS.iter().copied().filter(|o| matches!(w.object.get(o), Some(Holder::Actor(a, _)) if *a == actor)).collect();
    let free: Vec<&'static str> = OBJECTS
        .iter()
        .copied()
        .filter(|o| match w.object.get(o) {
            None => true,
            Some(Holder::Place(p, _)) => Some(*p) == here,
            Some(Holder::Actor(..)) => false,
        })
        .collect();
    match (rng.gen_range(0..3), here) {
        (0, Some(p)) if !free.is_empty() => {
            let o = pick(rng, &free);
            let line = out.statement(&format!("{} {} the {} there.", cap(actor), pick(rng, &GETS), o));
            w.object.insert(o, Holder::Actor(actor, line));
            let t = w.trail.entry(o).or_default();
            if t.last().map(|x| x.0) != Some(p) {
                t.push((p, line));
            }
        }
        (1, Some(p)) if !held.is_empty() => {
            let o = pick(rng, &held);
            let line = out.statement(&format!("{} {} the {}.", cap(actor), pick(rng, &DROPS), o));
            w.object.insert(o, Holder::Place(p, line));
        }
        _ => {
            movement(rng, w, out);
        }
    }
}

/// Task 2: "Where is the O?" with objects carried around.
fn where_object(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    let mut asked = 0;
    while asked < QUESTIONS_PER_STORY {
        object_statement(rng, &mut w, out);
        let known: Vec<(&str, (&str, usize))> = OBJECTS.iter().filter_map(|o| w.object_place(o).map(|p| (*o, p))).collect();
        if !known.is_empty() && rng.gen_bool(0.4) {
            let (o, (p, line)) = pick(rng, &known);
            out.question(&format!("Where is the {o}?"), p, &[line]);
            asked += 1;
        }
    }
}

/// Task 3: "Where was the O before the L?".
fn where_before(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    let mut asked = 0;
    while asked < QUESTIONS_PER_STORY {
        object_statement(rng, &mut w, out);
        let ready: Vec<(&str, &Vec<(&str, usize)>)> = w.trail.iter().filter(|(_, t)| t.len() >= 2).map(|(o, t)| (*o, t)).collect();
        if !ready.is_empty() && rng.gen_bool(0.4) {
            let (o, t) = pick(rng, &ready);
            let (last, before) = (t[t.len() - 1], t[t.len() - 2]);
            out.question(&format!("Where was the {o} before the {}?", last.0), before.0, &[before.1, last.1]);
            asked += 1;
        }
    }
}

/// Task 5: "Who gave the O to Y?".
fn who_gave(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        movement(rng, &mut w, out);
        let giver = pick(rng, &ACTORS);
        let receiver = pick(rng, &ACTORS.iter().copied().filter(|a| *a != giver).collect::<Vec<_>>());
        let o = pick(rng, &OBJECTS);
        let line = out.statement(&format!("{} {} the {} to {}.", cap(giver), pick(rng, &GIVES), o, cap(receiver)));
        w.gave.push((giver, o, receiver, line));
        let (g, o, r, l) = pick(rng, &w.gave);
        // The latest giving of the same object to the same person wins.
        let (g, l) = w.gave.iter().rev().find(|x| x.1 == o && x.2 == r).map_or((g, l), |x| (x.0, x.3));
        out.question(&format!("Who gave the {o} to {}?", cap(r)), g, &[l]);
    }
}

/// Task 7: "How many objects is X carrying?".
fn counting(rng: &mut ChaCha8Rng, out: &mut Writer) {
    let mut w = World::default();
    for _ in 0..QUESTIONS_PER_STORY {
        object_statement(rng, &mut w, out);
        object_statement(rng, &mut w, out);
        let actor = pick(rng, &ACTORS);
        let held: Vec<usize> = w
            .object
            .values()
            .filter_map(|h| match h {
                Holder::Actor(a, l) if *a == actor => Some(*l),
                _ => None,
            })
            .collect();
        let words = ["none", "one", "two", "three"];
        out.question(&format!("How many objects is {} carrying?", cap(actor)), words[held.len()], &held);
    }
}

/// `stories` stories for `task` in bAbI text format.
pub fn generate_text(task: u8, stories: usize, seed: u64) -> Option<String> {
    let gen: fn(&mut ChaCha8Rng, &mut Writer) = match task {
        1 => where_is,
        2 => where_object,
        3 => where_before,
        5 => who_gave,
        6 => is_in,
        7 => counting,
        9 => negation,
        10 => indefinite,
        _ => return None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(task) << 32));
    let mut text = String::new();
    for _ in 0..stories {
        let mut w = Writer { text: String::new(), line: 0 };
        gen(&mut rng, &mut w);
        text.push_str(&w.text);
    }
    Some(text)
}

/// Parsed stories for `task`; `None` for tasks without a generator.
pub fn generate(task: u8, stories: usize, seed: u64) -> Option<Vec<Story>> {
    generate_text(task, stories, seed).map(|t| parse_babi(&t).expect("generated stories parse"))
}

/// Disjoint train and test splits: different seeds for the two halves.
pub fn split(task: u8, stories: usize, seed: u64) -> Option<(Vec<Story>, Vec<Story>)> {
    Some((generate(task, stories, seed)?, generate(task, stories, seed.wrapping_add(0x9e37_79b9))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_task_generates_five_questions_per_story() {
        for task in TASKS {
            let stories = generate(task, 4, 7).unwrap();
            assert_eq!(stories.len(), 4);
            for s in &stories {
                assert_eq!(s.questions().count(), QUESTIONS_PER_STORY, "task {task}");
            }
        }
        assert!(generate(4, 1, 0).is_none());
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(generate_text(10, 3, 1), generate_text(10, 3, 1));
        assert_ne!(generate_text(10, 3, 1), generate_text(10, 3, 2));
    }

    #[test]
    fn where_is_answers_latest_move() {
        let text = generate_text(1, 20, 3).unwrap();
        for story in parse_babi(&text).unwrap() {
            let mut at = BTreeMap::new();
            for s in &story.sentences {
                let words: Vec<&str> = s.text.trim_end_matches(['.', '?']).split(' ').collect();
                if s.is_question {
                    let who = words[2].to_lowercase();
                    assert_eq!(at.get(&who), s.answer_key.as_ref().map(|k| &k.correct[0]));
                } else {
                    at.insert(words[0].to_lowercase(), words[words.len() - 1].to_string());
                }
            }
        }
    }

    #[test]
    fn indefinite_uses_all_three_answers() {
        let stories = generate(10, 30, 5).unwrap();
        let answers: std::collections::BTreeSet<String> =
            stories.iter().flat_map(|s| s.questions()).map(|q| q.answer_key.as_ref().unwrap().correct[0].clone()).collect();
        assert_eq!(answers.into_iter().collect::<Vec<_>>(), ["maybe", "no", "yes"]);
    }
}
