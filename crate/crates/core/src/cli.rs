//! Command-line front end.
//!
//! Settings are resolved as: command-line flags, then an optional
//! `key = value` config file, then built-in defaults. `VCH_SEED` in the
//! environment overrides the base seed from either source.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::benchmarks::{self, ENGINEERING_NAMES, PROBLEM_NAMES};
use crate::engine::{EngineError, GaConfig, Handler};
use crate::harness::{emit_results, run_experiment, ExperimentConfig, HarnessError, SummaryBasis};

pub const SEED_ENV: &str = "VCH_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const HANDLER_NAMES: [&str; 4] = ["vch", "static-penalty", "dynamic-penalty", "deb"];

#[derive(Debug, Parser)]
#[command(
    name = "vch",
    version,
    about = "Constrained optimization with a violation-ranked genetic algorithm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run repeated seeded optimizations and write runs.csv, trace.csv and summary.json.
    Run(Box<RunArgs>),
    /// Print the registered problems.
    ListProblems,
    /// Evaluate the published reference points of the engineering benchmarks.
    VerifyReferences,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_parser = HANDLER_NAMES)]
    handler: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    elites: Option<usize>,
    #[arg(long)]
    cross: Option<usize>,
    /// Defaults to pop - elites - cross when only --cross is given.
    #[arg(long = "mut")]
    mutants: Option<usize>,
    #[arg(long)]
    max_gen: Option<u64>,
    #[arg(long)]
    max_evals: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    tournament: Option<usize>,
    /// Start from a population of feasible points found by rejection sampling.
    #[arg(long)]
    feasible_init: bool,
    /// Execute the runs on a thread pool.
    #[arg(long)]
    parallel: bool,
    /// Use 94 crossovers, 5 uniform mutants and patience 25.
    #[arg(long)]
    classic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines using the flag names without dashes.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown problem `{0}`; see `vch list-problems`")]
    UnknownProblem(String),
    #[error("missing --problem")]
    MissingProblem,
    #[error("unknown handler `{0}`")]
    UnknownHandler(String),
    #[error("{path}:{line}: {message}")]
    ConfigFile {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid value `{value}` for {key}: {message}")]
    BadValue {
        key: String,
        value: String,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("population layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Config(#[from] crate::engine::ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Harness(HarnessError::UnknownProblem(_) | HarnessError::NoRuns)
            | CliError::Harness(HarnessError::Engine {
                source: EngineError::Config(_),
                ..
            }) => EXIT_USAGE,
            CliError::Harness(_) => EXIT_RUNTIME,
            _ => EXIT_USAGE,
        }
    }
}

const CONFIG_KEYS: [&str; 17] = [
    "problem",
    "handler",
    "runs",
    "seed",
    "pop",
    "elites",
    "cross",
    "mut",
    "max-gen",
    "max-evals",
    "tol",
    "patience",
    "tournament",
    "feasible-init",
    "parallel",
    "classic",
    "out",
];

/// Parsed `key = value` file. Blank lines and `#` comments are skipped;
/// underscores in keys are accepted in place of dashes.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| CliError::ConfigFile {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(bad(format!("unknown key `{key}`")));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| parse_value(key, v))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn parse_value<T>(key: &str, value: &str) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    value.parse().map_err(|e: T::Err| CliError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        message: e.to_string(),
    })
}

/// Everything `run` needs once flags, file and defaults are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub experiment: ExperimentConfig,
    pub out: PathBuf,
}

fn resolve(args: &RunArgs, env_seed: Option<&str>) -> Result<RunPlan, CliError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr + Clone,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => file.get(key),
        }
    }

    let problem = pick(args.problem.clone(), &file, "problem")?.ok_or(CliError::MissingProblem)?;
    if benchmarks::by_name(&problem).is_none() {
        return Err(CliError::UnknownProblem(problem));
    }
    let classic = args.classic || file.flag("classic")?;
    let mut ga = if classic {
        GaConfig::classic()
    } else {
        GaConfig::default()
    };
    let base = ga.clone();

    if let Some(name) = pick(args.handler.clone(), &file, "handler")? {
        ga.handler = Handler::from_name(&name).ok_or(CliError::UnknownHandler(name))?;
    }
    ga.pop_num = pick(args.pop, &file, "pop")?.unwrap_or(base.pop_num);
    ga.n_elite = pick(args.elites, &file, "elites")?.unwrap_or(base.n_elite);
    let cross = pick(args.cross, &file, "cross")?;
    let mutants = pick(args.mutants, &file, "mut")?;
    let (n_cross, n_mut) = layout(&ga, &base, cross, mutants)?;
    ga.n_cross = n_cross;
    ga.n_mut = n_mut;
    ga.max_generations = pick(args.max_gen, &file, "max-gen")?.unwrap_or(base.max_generations);
    ga.max_evaluations = pick(args.max_evals, &file, "max-evals")?.unwrap_or(base.max_evaluations);
    ga.stop_tolerance = pick(args.tol, &file, "tol")?.unwrap_or(base.stop_tolerance);
    ga.stop_patience = pick(args.patience, &file, "patience")?.unwrap_or(base.stop_patience);
    ga.tournament_size =
        pick(args.tournament, &file, "tournament")?.unwrap_or(base.tournament_size);
    ga.feasible_init = args.feasible_init || file.flag("feasible-init")?;
    ga.validate()?;

    let mut experiment = ExperimentConfig::new(problem);
    experiment.ga = ga;
    experiment.num_runs = pick(args.runs, &file, "runs")?.unwrap_or(experiment.num_runs);
    experiment.base_seed = match env_seed {
        Some(v) => parse_value(SEED_ENV, v.trim())?,
        None => pick(args.seed, &file, "seed")?.unwrap_or(0),
    };
    experiment.parallel = args.parallel || file.flag("parallel")?;
    if experiment.num_runs == 0 {
        return Err(HarnessError::NoRuns.into());
    }
    let out = pick(args.out.clone(), &file, "out")?.unwrap_or_else(|| PathBuf::from("results"));
    Ok(RunPlan { experiment, out })
}

/// Fills in whichever of crossover and mutant counts is missing so the
/// layout adds up to the population size. With neither given, the default
/// mutant share is kept.
fn layout(
    ga: &GaConfig,
    base: &GaConfig,
    cross: Option<usize>,
    mutants: Option<usize>,
) -> Result<(usize, usize), CliError> {
    let free = ga.pop_num.checked_sub(ga.n_elite).ok_or_else(|| {
        CliError::Layout(format!(
            "{} elites exceed population {}",
            ga.n_elite, ga.pop_num
        ))
    })?;
    let derive = |given: usize, what: &str| {
        free.checked_sub(given).ok_or_else(|| {
            CliError::Layout(format!(
                "{given} {what} leave no room in population {} with {} elites",
                ga.pop_num, ga.n_elite
            ))
        })
    };
    match (cross, mutants) {
        (Some(c), Some(m)) => Ok((c, m)),
        (Some(c), None) => Ok((c, derive(c, "crossovers")?)),
        (None, Some(m)) => Ok((derive(m, "mutants")?, m)),
        (None, None) => {
            let share = base.n_mut as f64 / base.pop_num as f64;
            let m = ((ga.pop_num as f64 * share).round() as usize).min(free);
            Ok((free - m, m))
        }
    }
}

fn run_command(
    args: &RunArgs,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let plan = resolve(args, env_seed)?;
    let experiment = run_experiment(&plan.experiment)?;
    let paths = emit_results(&experiment, &plan.out)?;
    let s = &experiment.summary;
    let _ = writeln!(
        out,
        "{} with {}: {} runs, {} feasible",
        experiment.problem,
        experiment.handler,
        experiment.runs.len(),
        s.feasible_run_count
    );
    let label = match s.basis {
        SummaryBasis::Objective => "f",
        SummaryBasis::ConstraintViolation => "cv (no feasible run)",
    };
    let _ = writeln!(
        out,
        "{label}: best {:.6} mean {:.6} median {:.6} worst {:.6} std {:.3e}",
        s.best_f, s.mean_f, s.median_f, s.worst_f, s.std_f
    );
    let _ = writeln!(out, "mean evaluations: {:.1}", s.mean_evaluations);
    let _ = writeln!(
        out,
        "wrote {}",
        paths.runs.parent().unwrap_or(&plan.out).display()
    );
    Ok(())
}

fn list_problems(out: &mut dyn Write) {
    for name in PROBLEM_NAMES {
        if let Some(entry) = benchmarks::by_name(name) {
            let p = &entry.problem;
            let _ = writeln!(
                out,
                "{name:<16} {} variables, {} constraints",
                p.dimension(),
                p.constraints().len()
            );
        }
    }
}

/// Prints one row per engineering benchmark; returns whether all passed.
fn verify_references(out: &mut dyn Write) -> bool {
    let mut all = true;
    for name in ENGINEERING_NAMES {
        let entry = benchmarks::by_name(name).expect("registered benchmark");
        let checks = entry.verify();
        let ok = checks.iter().all(|c| c.passed());
        all &= ok;
        let _ = writeln!(out, "{name:<16} {}", if ok { "PASS" } else { "FAIL" });
        for c in &checks {
            let expect = if c.expect_feasible {
                "feasible"
            } else {
                "infeasible"
            };
            let _ = writeln!(
                out,
                "    {}: f = {:.6} (expected {} +/- {:e}) max G = {:.3e}, expected {expect}{}",
                c.label,
                c.f,
                c.expected_f,
                c.tolerance,
                c.max_g,
                if c.passed() { "" } else { "  <-- mismatch" }
            );
        }
    }
    all
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(
    args: I,
    env_seed: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match cli.command {
        Command::ListProblems => {
            list_problems(out);
            EXIT_OK
        }
        Command::VerifyReferences => {
            if verify_references(out) {
                EXIT_OK
            } else {
                EXIT_USAGE
            }
        }
        Command::Run(args) => match run_command(&args, env_seed, out) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(
        args,
        env_seed.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
