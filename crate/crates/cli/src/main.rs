use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use narrasp::bias::{enumerate_space, BiasConfig, ModeDecl, SpaceCache};
use narrasp::corpus;
use narrasp::logic::{parse_atom, parse_program};
use narrasp::nl::{load_babi, CachedParser, DeterministicParser, HttpParser, Lexicon, ParseCache, ParserBackend};
use narrasp::pipeline::{run_task, Session, SessionConfig};
use narrasp::solver::{answer_sets, answer_sets_traced, entailment_in, SolveOptions};

#[derive(Parser)]
#[command(name = "narrasp", version, about = "Learn ASP rules from question answering over stories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Deterministic,
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Train on one bAbI file, evaluate on another.
    Learn {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Lexicon file; the built-in bAbI lexicon when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Event-calculus representation.
        #[arg(long)]
        ec: bool,
        #[arg(long, value_enum, default_value = "deterministic")]
        backend: Backend,
        #[arg(long)]
        endpoint: Option<String>,
        /// Append-only cache of sentence parses.
        #[arg(long)]
        parse_cache: Option<PathBuf>,
        #[arg(long)]
        maxv: Option<usize>,
        #[arg(long)]
        max_body: Option<usize>,
        #[arg(long, default_value_t = 50)]
        max_penalty: usize,
        #[arg(long)]
        space_cap: Option<usize>,
        /// Seconds per learning call.
        #[arg(long)]
        time_budget: Option<u64>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the answer sets of a program, or query it.
    Solve {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        query: Option<String>,
        /// Write every candidate's reduct check to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 10_000)]
        bound: usize,
    },
    /// Enumerate the hypothesis space of a file of mode declarations.
    Space {
        #[arg(long)]
        decls: PathBuf,
        #[arg(long, default_value_t = 3)]
        maxv: usize,
        #[arg(long, default_value_t = 3)]
        max_body: usize,
        #[arg(long)]
        space_cap: Option<usize>,
        /// Print only the cost histogram.
        #[arg(long)]
        summary: bool,
    },
    /// Write a synthetic bAbI-style corpus.
    Generate {
        #[arg(long)]
        task: u8,
        #[arg(long, default_value_t = 20)]
        stories: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn learn(
    train: &Path,
    test: &Path,
    lexicon: Option<&Path>,
    backend: Backend,
    endpoint: Option<&str>,
    parse_cache: Option<&Path>,
    config: SessionConfig,
    cache_dir: Option<&Path>,
    report: Option<&Path>,
) -> Result<i32> {
    let lexicon = match lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::default_babi(),
    };
    let train_stories = load_babi(train)?;
    let test_stories = load_babi(test)?;
    let parser: Arc<dyn ParserBackend> = match (backend, endpoint) {
        (Backend::Deterministic, _) => Arc::new(DeterministicParser::new(lexicon.clone())),
        (Backend::Http, Some(url)) => {
            let cache = match parse_cache {
                Some(p) => ParseCache::open(p)?,
                None => ParseCache::in_memory(),
            };
            Arc::new(CachedParser::new(HttpParser::new(url), cache))
        }
        (Backend::Http, None) => bail!("--backend http needs --endpoint"),
    };
    let spaces = Arc::new(match cache_dir {
        Some(d) => SpaceCache::on_disk(d),
        None => SpaceCache::in_memory(),
    });
    let mut session = Session::new(config, lexicon, parser, spaces);
    let name = train.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let r = run_task(&mut session, &name, &train_stories, &test_stories);
    eprintln!(
        "train {}/{}  test {}/{}  accuracy {:.3}  learn invocations {}  failures {}",
        r.train.correct, r.train.questions, r.test.correct, r.test.questions, r.accuracy, r.learn_invocations, r.learn_failures
    );
    for e in &r.errors {
        eprintln!("error: {e}");
    }
    println!("% score {}", r.hypothesis_score);
    for rule in &r.learned_rules {
        println!("{rule}");
    }
    if let Some(path) = report {
        fs::write(path, r.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(r.exit_code())
}

fn solve(program: &Path, query: Option<&str>, trace: bool, bound: usize) -> Result<i32> {
    let program = parse_program(&read(program)?)?;
    let opts = SolveOptions { bound, ..SolveOptions::default() };
    let result = if trace { answer_sets_traced(&program, &opts, &mut std::io::stderr())? } else { answer_sets(&program, &opts)? };
    let mut out = std::io::stdout().lock();
    match query {
        Some(q) => {
            let atom = parse_atom(q)?;
            writeln!(out, "{}", entailment_in(&result, &atom)?)?;
        }
        None => {
            for (i, set) in result.answer_sets.iter().enumerate() {
                writeln!(out, "Answer {}: {}", i + 1, set.sorted_strings().join(" "))?;
            }
            if result.is_unsatisfiable() {
                writeln!(out, "UNSATISFIABLE")?;
            } else if !result.complete {
                writeln!(out, "% stopped after {bound} answer sets")?;
            }
        }
    }
    Ok(0)
}

fn space(decls: &Path, config: &BiasConfig, summary: bool) -> Result<i32> {
    let decls = ModeDecl::parse_all(&read(decls)?)?;
    let space = enumerate_space(&decls, config)?;
    let mut out = std::io::stdout().lock();
    if !summary {
        for c in &space.rules {
            writeln!(out, "{} ~ {}", c.cost, c.rule)?;
        }
    }
    for (cost, n) in space.cost_histogram() {
        writeln!(out, "% cost {cost}: {n}")?;
    }
    writeln!(out, "% total: {}", space.len())?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Learn {
            train,
            test,
            lexicon,
            ec,
            backend,
            endpoint,
            parse_cache,
            maxv,
            max_body,
            max_penalty,
            space_cap,
            time_budget,
            cache_dir,
            seed,
            report,
        } => {
            let mut config = SessionConfig::new(ec);
            config.seed = seed;
            if let Some(v) = maxv {
                config.bias.maxv = v;
            }
            if let Some(b) = max_body {
                config.bias.max_body = b;
            }
            if let Some(c) = space_cap {
                config.bias.space_cap = c;
            }
            config.learn.max_penalty = max_penalty;
            config.learn.time_budget = time_budget.map(Duration::from_secs);
            learn(
                &train,
                &test,
                lexicon.as_deref(),
                backend,
                endpoint.as_deref(),
                parse_cache.as_deref(),
                config,
                cache_dir.as_deref(),
                report.as_deref(),
            )
        }
        Command::Solve { program, query, trace, bound } => solve(&program, query.as_deref(), trace, bound),
        Command::Space { decls, maxv, max_body, space_cap, summary } => {
            let mut config = BiasConfig::with_maxv(maxv);
            config.max_body = max_body;
            if let Some(c) = space_cap {
                config.space_cap = c;
            }
            space(&decls, &config, summary)
        }
        Command::Generate { task, stories, seed, out } => {
            let Some(text) = corpus::generate_text(task, stories, seed) else {
                bail!("no generator for task {task}; available: {:?}", corpus::TASKS)
            };
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
