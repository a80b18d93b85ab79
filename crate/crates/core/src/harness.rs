//! Repeated seeded runs, summary statistics and result files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmarks;
use crate::engine::{self, EngineError, GaConfig, RunResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("num_runs must be at least 1")]
    NoRuns,
    #[error("run {run_id}: {source}")]
    Engine {
        run_id: usize,
        #[source]
        source: EngineError,
    },
    #[error("no run ended with a feasible best")]
    NoFeasibleRuns(Box<ExperimentSummary>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl HarnessError {
    fn io(path: &Path, source: impl Into<io::Error>) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem_name: String,
    pub ga: GaConfig,
    pub num_runs: usize,
    pub base_seed: u64,
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(problem_name: impl Into<String>) -> Self {
        Self {
            problem_name: problem_name.into(),
            ga: GaConfig::default(),
            num_runs: 20,
            base_seed: 0,
            parallel: false,
        }
    }

    /// Seed of run `run_id`.
    pub fn seed_for(&self, run_id: usize) -> u64 {
        self.base_seed.wrapping_add(run_id as u64)
    }
}

/// What the summary statistics were computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryBasis {
    /// Best objective values of the runs that ended feasible.
    Objective,
    /// Best `cv` of every run; used when no run ended feasible.
    ConstraintViolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub best_f: f64,
    pub mean_f: f64,
    pub median_f: f64,
    pub worst_f: f64,
    pub std_f: f64,
    pub mean_evaluations: f64,
    pub mean_wall_ms: f64,
    pub feasible_run_count: usize,
    pub basis: SummaryBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub problem: String,
    pub handler: String,
    pub runs: Vec<RunResult>,
    pub summary: ExperimentSummary,
}

/// Layout of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub problem: String,
    pub handler: String,
    pub num_runs: usize,
    pub best: f64,
    pub mean: f64,
    pub median: f64,
    pub worst: f64,
    pub std: f64,
    pub mean_evals: f64,
    pub feasible_runs: usize,
    pub basis: SummaryBasis,
}

impl Experiment {
    pub fn summary_record(&self) -> SummaryRecord {
        let s = &self.summary;
        SummaryRecord {
            problem: self.problem.clone(),
            handler: self.handler.clone(),
            num_runs: self.runs.len(),
            best: s.best_f,
            mean: s.mean_f,
            median: s.median_f,
            worst: s.worst_f,
            std: s.std_f,
            mean_evals: s.mean_evaluations,
            feasible_runs: s.feasible_run_count,
            basis: s.basis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

/// Statistics of a non-empty sample.
pub fn sample_stats(values: &[f64]) -> Option<SampleStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n == 1 {
        0.0
    } else {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Some(SampleStats {
        min: sorted[0],
        mean,
        median,
        max: sorted[n - 1],
        std,
    })
}

/// Statistics over the feasible run bests. When no run is feasible the
/// error carries a summary over the runs' best `cv` instead.
pub fn summarize(results: &[RunResult]) -> Result<ExperimentSummary, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::NoRuns);
    }
    let n = results.len() as f64;
    let mean_evaluations = results
        .iter()
        .map(|r| r.total_evaluations as f64)
        .sum::<f64>()
        / n;
    let mean_wall_ms = results.iter().map(|r| r.wall_time_ms).sum::<f64>() / n;
    let feasible: Vec<f64> = results
        .iter()
        .filter(|r| r.best.feasible)
        .map(|r| r.best.f)
        .collect();

    let (basis, stats) = match sample_stats(&feasible) {
        Some(stats) => (SummaryBasis::Objective, stats),
        None => {
            let cvs: Vec<f64> = results.iter().map(|r| r.best.cv).collect();
            let stats = sample_stats(&cvs).expect("results is non-empty");
            (SummaryBasis::ConstraintViolation, stats)
        }
    };
    let summary = ExperimentSummary {
        best_f: stats.min,
        mean_f: stats.mean,
        median_f: stats.median,
        worst_f: stats.max,
        std_f: stats.std,
        mean_evaluations,
        mean_wall_ms,
        feasible_run_count: feasible.len(),
        basis,
    };
    match basis {
        SummaryBasis::Objective => Ok(summary),
        SummaryBasis::ConstraintViolation => Err(HarnessError::NoFeasibleRuns(Box::new(summary))),
    }
}

/// Runs `num_runs` independent seeded runs. The output does not depend on
/// `parallel`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    let entry = benchmarks::by_name(&cfg.problem_name)
        .ok_or_else(|| HarnessError::UnknownProblem(cfg.problem_name.clone()))?;
    if cfg.num_runs == 0 {
        return Err(HarnessError::NoRuns);
    }
    let problem = &entry.problem;
    let one = |run_id: usize| {
        let ga = cfg.ga.clone().with_seed(cfg.seed_for(run_id));
        engine::run(problem, &ga).map_err(|source| HarnessError::Engine { run_id, source })
    };
    let runs: Vec<RunResult> = if cfg.parallel {
        (0..cfg.num_runs)
            .into_par_iter()
            .map(one)
            .collect::<Result<_, _>>()?
    } else {
        (0..cfg.num_runs).map(one).collect::<Result<_, _>>()?
    };
    let summary = match summarize(&runs) {
        Ok(summary) => summary,
        Err(HarnessError::NoFeasibleRuns(summary)) => *summary,
        Err(e) => return Err(e),
    };
    Ok(Experiment {
        problem: cfg.problem_name.clone(),
        handler: cfg.ga.handler.name().to_string(),
        runs,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub runs: PathBuf,
    pub trace: PathBuf,
    pub summary: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            runs: dir.join("runs.csv"),
            trace: dir.join("trace.csv"),
            summary: dir.join("summary.json"),
        }
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

pub fn runs_header(dimension: usize) -> Vec<String> {
    let mut header: Vec<String> = [
        "run_id",
        "seed",
        "best_f",
        "feasible",
        "cv",
        "nv",
        "evals",
        "generations",
        "stop_reason",
        "wall_ms",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..dimension).map(|k| format!("x_{k}")));
    header
}

pub const TRACE_HEADER: [&str; 7] = [
    "run_id",
    "generation",
    "best_f",
    "best_feasible",
    "avg_cv_elites",
    "num_feasible",
    "evals_so_far",
];

fn write_runs(path: &Path, runs: &[RunResult]) -> Result<(), HarnessError> {
    let err = |e: csv::Error| HarnessError::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let dimension = runs.first().map_or(0, |r| r.best.x.len());
    w.write_record(runs_header(dimension)).map_err(err)?;
    for (run_id, r) in runs.iter().enumerate() {
        let mut row = vec![
            run_id.to_string(),
            r.seed.to_string(),
            num(r.best.f),
            r.best.feasible.to_string(),
            num(r.best.cv),
            num(r.best.nv),
            r.total_evaluations.to_string(),
            r.generations_run.to_string(),
            r.stop_reason.as_str().to_string(),
            num(r.wall_time_ms),
        ];
        row.extend(r.best.x.iter().map(|&v| num(v)));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn write_trace(path: &Path, runs: &[RunResult]) -> Result<(), HarnessError> {
    let err = |e: csv::Error| HarnessError::io(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(TRACE_HEADER).map_err(err)?;
    for (run_id, r) in runs.iter().enumerate() {
        for t in &r.trace {
            w.write_record([
                run_id.to_string(),
                t.generation.to_string(),
                num(t.best_f),
                t.best_feasible.to_string(),
                num(t.avg_cv_elites),
                t.num_feasible.to_string(),
                t.evals_so_far.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes `runs.csv`, `trace.csv` and `summary.json` into `dir`, creating
/// it if needed.
pub fn emit_results(experiment: &Experiment, dir: &Path) -> Result<OutputPaths, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let paths = OutputPaths::in_dir(dir);
    write_runs(&paths.runs, &experiment.runs)?;
    write_trace(&paths.trace, &experiment.runs)?;
    let json = serde_json::to_string_pretty(&experiment.summary_record())
        .map_err(|e| HarnessError::io(&paths.summary, e))?;
    fs::write(&paths.summary, json + "\n").map_err(|e| HarnessError::io(&paths.summary, e))?;
    Ok(paths)
}
