use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mutexlog::check::{cross_check, CheckConfig};
use mutexlog::engine::CommitTrigger;
use mutexlog::modsys::{collect_goal_modrefs, read_module_file};
use mutexlog::{
    parse_goal, CommitMode, Config, DFormula, Engine, GFormula, ModuleRegistry, OccursCheck,
    Program,
};

mod repl;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Call,
    Global,
    Off,
}

impl From<ModeArg> for CommitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Call => CommitMode::Call,
            ModeArg::Global => CommitMode::Global,
            ModeArg::Off => CommitMode::Off,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Run logic programs with choice-conjunctive modules.
///
/// Without --query, starts an interactive session.
#[derive(Debug, Parser)]
#[command(name = "mutexlog", version)]
struct Cli {
    /// Program or module file to load (repeatable). Files starting with
    /// `mod(name).` become modules; others add clauses to the program.
    #[arg(short, long = "file", value_name = "PATH")]
    files: Vec<PathBuf>,

    /// Goal to solve in batch mode.
    #[arg(short, long)]
    query: Option<String>,

    #[arg(long, value_enum, default_value = "call")]
    commit_mode: ModeArg,

    /// Maximum resolution depth.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    depth: Option<u32>,

    #[arg(long, value_enum, default_value = "on")]
    occurs_check: Switch,

    /// Compare the engine against the reference prover on a random corpus.
    #[arg(long, requires = "depth")]
    oracle_check: bool,

    /// Number of random instances for --oracle-check.
    #[arg(long, default_value_t = 200)]
    corpus_size: usize,

    /// First seed for --oracle-check.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Print one line per inference rule to stderr.
    #[arg(long)]
    trace: bool,

    /// Stop after this many answers.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_answers: Option<u64>,

    /// Extra directory to search for modules (repeatable). MUTEXLOG_PATH is
    /// searched after these.
    #[arg(long = "path", value_name = "DIR")]
    paths: Vec<PathBuf>,

    /// Prune the right side of a choice on entry instead of on the first
    /// answer. Only useful to see --oracle-check fail.
    #[arg(long, hide = true)]
    inject_commit_fault: bool,
}

/// Loaded program and modules.
pub(crate) struct Session {
    pub program: Program,
    pub registry: ModuleRegistry,
    pub config: Config,
}

impl Session {
    fn new(paths: &[PathBuf], config: Config) -> Self {
        Session {
            program: Program::default(),
            registry: ModuleRegistry::new()
                .with_load_paths(paths.iter().cloned())
                .with_env_load_paths(),
            config,
        }
    }

    /// Loads one file. Its directory is searched for modules it mentions.
    pub fn load(&mut self, path: &Path) -> anyhow::Result<()> {
        let m = read_module_file(path)?;
        if let Some(dir) = path.parent() {
            let dir = if dir.as_os_str().is_empty() {
                Path::new(".")
            } else {
                dir
            };
            if !self.registry.load_paths().iter().any(|p| p == dir) {
                self.registry = self.registry.clone().with_load_paths([dir.to_path_buf()]);
            }
        }
        if m.name.is_some() {
            self.registry = self.registry.register_module(m)?;
        } else {
            for c in m.clauses {
                self.program.push(c);
            }
        }
        Ok(())
    }

    /// Loads modules referenced by the program or `goal` that are still
    /// missing, from the load paths.
    pub fn autoload(&mut self, goal: Option<&GFormula>) -> anyhow::Result<()> {
        let mut names = Vec::new();
        if let Some(g) = goal {
            collect_goal_modrefs(g, &mut names);
        }
        let roots: Vec<DFormula> = names
            .iter()
            .map(|n| DFormula::modref(n))
            .chain(self.program.clauses.iter().cloned())
            .collect();
        self.registry = self.registry.autoload(roots.iter())?;
        Ok(())
    }
}

pub(crate) fn parse_query(text: &str) -> anyhow::Result<GFormula> {
    parse_goal(text).map_err(|e| anyhow::anyhow!("query:{e}"))
}

fn run_batch(session: &mut Session, query: &str, max_answers: Option<u64>) -> anyhow::Result<u8> {
    let goal = parse_query(query)?;
    session.autoload(Some(&goal))?;
    let engine =
        Engine::new(&session.program, &session.registry).with_config(session.config.clone());
    let mut sols = engine.solve(&goal);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut count = 0u64;
    while max_answers.is_none_or(|m| count < m) {
        match sols.next() {
            Some(Ok(answer)) => {
                if count > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "{answer}")?;
                count += 1;
            }
            Some(Err(e)) => return Err(e.into()),
            None => break,
        }
    }
    out.flush()?;
    Ok(if count > 0 {
        0
    } else if sols.depth_exhausted() {
        3
    } else {
        1
    })
}

fn run_oracle_check(cli: &Cli) -> u8 {
    let cfg = CheckConfig {
        depth: cli.depth.expect("clap enforces --depth"),
        corpus_size: cli.corpus_size,
        seed: cli.seed,
        commit_trigger: if cli.inject_commit_fault {
            CommitTrigger::Entry
        } else {
            CommitTrigger::FirstAnswer
        },
        ..CheckConfig::default()
    };
    let report = cross_check(&cfg);
    for m in &report.mismatches {
        eprintln!("{}", m.reproduction());
    }
    println!("{report}");
    if report.passed() {
        0
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.oracle_check {
        return ExitCode::from(run_oracle_check(&cli));
    }

    let mut config = Config::default()
        .commit_mode(cli.commit_mode.into())
        .depth_limit(cli.depth)
        .trace(cli.trace)
        .occurs_check(match cli.occurs_check {
            Switch::On => OccursCheck::On,
            Switch::Off => OccursCheck::Off,
        });
    if cli.inject_commit_fault {
        config.commit_trigger = CommitTrigger::Entry;
    }
    let mut session = Session::new(&cli.paths, config);
    for f in &cli.files {
        if let Err(e) = session.load(f) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    match &cli.query {
        Some(q) => match run_batch(&mut session, q, cli.max_answers) {
            Ok(code) => ExitCode::from(code),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        None => match repl::run(&mut session, io::stdin().lock(), io::stdout().lock()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
