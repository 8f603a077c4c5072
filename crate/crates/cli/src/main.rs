#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use volmaj_core::{Error, ExprError};

mod commands;
mod config;
mod output;

use commands::RunOutput;
use config::RunConfig;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_CONDITION_FAILED: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_NUMERIC,
            CliError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_) | Error::Precondition(_) | Error::MultipleSolutions(_) => EXIT_INVALID,
        Error::Expr(ExprError::Domain { .. }) => EXIT_NUMERIC,
        Error::Expr(_) => EXIT_INVALID,
        Error::AtNode { source, .. } => core_code(source),
        _ => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "volmaj",
    version,
    about = "Main solutions of nonlinear Volterra equations and their majorants",
    after_help = EXPRESSIONS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for summary and CSV files.
    #[arg(long, default_value = "volmaj-out")]
    out: PathBuf,
    /// Worker threads; batch runs are spread over them.
    #[arg(long)]
    jobs: Option<usize>,
    /// Leave the timestamp out of summary.txt.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the equation for its main solution.
    Solve(RunArgs),
    /// Classify and solve the integral majorant.
    Majorant(RunArgs),
    /// Tangency point and branch of an algebraic majorant.
    Lyapunov(RunArgs),
    /// Sampled checks of the majorant hypotheses.
    Verify(RunArgs),
    /// Built-in reference problems.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
enum CorpusAction {
    /// Names, parameters and notes.
    List,
}

const EXPRESSIONS: &str = "\
Expressions use + - * / ^, parentheses and sin cos tan exp log sqrt abs.
^ is right-associative and binds tighter than unary minus: -t^2 is -(t^2), 2^3^2 is 2^(3^2).
Variables: majorant f(t, w), gamma(z), upper(t); Lyapunov f(r, t); kernel (t, s, u); outer map (w, u, t).

Exit codes: 0 success, 2 invalid configuration or specification, 3 numeric failure,
4 solver did not converge, 5 a sampled condition failed.";

type Pipeline = fn(&RunConfig, bool) -> Result<RunOutput, CliError>;

fn run_one(pipeline: Pipeline, cfg: &RunConfig, dir: &Path, timestamp: bool) -> (String, i32) {
    match pipeline(cfg, timestamp) {
        Ok(out) => match out.report.write_to(dir) {
            Ok(()) => (out.report.stdout, out.code),
            Err(e) => {
                eprintln!("error: {e}");
                (out.report.stdout, e.code())
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            (String::new(), e.code())
        }
    }
}

fn run(pipeline: Pipeline, args: &RunArgs) -> i32 {
    if let Some(n) = args.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be positive");
            return EXIT_INVALID;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = match config::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let timestamp = !args.no_timestamp;
    if cfg.runs.is_empty() {
        let (stdout, code) = run_one(pipeline, &cfg, &args.out, timestamp);
        print!("{stdout}");
        return code;
    }
    let names: Vec<String> = cfg
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| r.name.clone().unwrap_or_else(|| format!("run-{i}")))
        .collect();
    if let Some(bad) = names.iter().find(|n| n.is_empty() || n.contains(['/', '\\']) || n.starts_with('.')) {
        eprintln!("error: invalid configuration: run name '{bad}' is not a plain directory name");
        return EXIT_INVALID;
    }
    let mut sorted = names.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        eprintln!("error: invalid configuration: run names must be distinct");
        return EXIT_INVALID;
    }
    let results: Vec<(String, i32)> = cfg
        .runs
        .par_iter()
        .zip(names.par_iter())
        .map(|(r, name)| run_one(pipeline, r, &args.out.join(name), timestamp))
        .collect();
    let mut stdout = std::io::stdout().lock();
    let mut code = 0;
    for (name, (text, c)) in names.iter().zip(&results) {
        let _ = writeln!(stdout, "[{name}]");
        let _ = write!(stdout, "{text}");
        let _ = writeln!(stdout, "exit = {c}");
        code = code.max(*c);
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(a) => run(commands::solve, a),
        Command::Majorant(a) => run(commands::majorant, a),
        Command::Lyapunov(a) => run(commands::lyapunov, a),
        Command::Verify(a) => run(commands::verify, a),
        Command::Corpus { action: CorpusAction::List } => {
            print!("{}", commands::corpus_list());
            0
        }
    };
    ExitCode::from(code as u8)
}
