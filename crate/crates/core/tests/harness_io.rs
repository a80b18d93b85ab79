use std::fs;

use vch::harness::{
    emit_results, run_experiment, sample_stats, ExperimentConfig, HarnessError, SummaryBasis,
    SummaryRecord, TRACE_HEADER,
};
use vch::GaConfig;

fn spring_cfg(runs: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("spring");
    cfg.num_runs = runs;
    cfg.base_seed = 42;
    cfg.ga = GaConfig {
        max_generations: 60,
        ..GaConfig::default()
    };
    cfg
}

#[test]
fn files_have_expected_shape() {
    let exp = run_experiment(&spring_cfg(20)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_results(&exp, dir.path()).unwrap();

    let runs = fs::read_to_string(&paths.runs).unwrap();
    let lines: Vec<&str> = runs.lines().collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(
        lines[0],
        "run_id,seed,best_f,feasible,cv,nv,evals,generations,stop_reason,wall_ms,x_0,x_1,x_2"
    );

    let mut reader = csv::Reader::from_path(&paths.trace).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        TRACE_HEADER
    );
    let mut last: Option<(u64, u64)> = None;
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let run: u64 = rec[0].parse().unwrap();
        let generation: u64 = rec[1].parse().unwrap();
        if let Some((r, g)) = last {
            if r == run {
                assert_eq!(generation, g + 1);
            } else {
                assert_eq!((run, generation), (r + 1, 0));
            }
        }
        last = Some((run, generation));
        rows += 1;
    }
    let expected: usize = exp.runs.iter().map(|r| r.trace.len()).sum();
    assert_eq!(rows, expected);

    let text = fs::read_to_string(&paths.summary).unwrap();
    let record: SummaryRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(record, exp.summary_record());
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "problem",
        "handler",
        "num_runs",
        "best",
        "mean",
        "median",
        "worst",
        "std",
        "mean_evals",
        "feasible_runs",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn summary_recomputes_from_runs_csv() {
    let exp = run_experiment(&spring_cfg(20)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_results(&exp, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(&paths.runs).unwrap();
    let mut feasible_f = Vec::new();
    let mut evals = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        if &rec[3] == "true" {
            feasible_f.push(rec[2].parse::<f64>().unwrap());
        }
        evals.push(rec[6].parse::<f64>().unwrap());
    }
    let stats = sample_stats(&feasible_f).unwrap();
    let s = &exp.summary;
    assert_eq!(s.basis, SummaryBasis::Objective);
    assert_eq!(s.feasible_run_count, feasible_f.len());
    assert_eq!(
        (s.best_f, s.worst_f, s.median_f),
        (stats.min, stats.max, stats.median)
    );
    assert!((s.mean_f - stats.mean).abs() <= 1e-15 * stats.mean.abs());
    assert!((s.std_f - stats.std).abs() <= 1e-12 * stats.std.abs().max(1e-300));
    let mean_evals = evals.iter().sum::<f64>() / evals.len() as f64;
    assert_eq!(s.mean_evaluations, mean_evals);
}

#[test]
fn parallel_matches_serial() {
    let serial = spring_cfg(8);
    let parallel = ExperimentConfig {
        parallel: true,
        ..serial.clone()
    };
    let a = run_experiment(&serial).unwrap();
    let b = run_experiment(&parallel).unwrap();
    assert_eq!(a.summary_record(), b.summary_record());
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.best, y.best);
        assert_eq!(x.trace, y.trace);
        assert_eq!(x.seed, y.seed);
    }
    let da = tempfile::tempdir().unwrap();
    let db = tempfile::tempdir().unwrap();
    let pa = emit_results(&a, da.path()).unwrap();
    let pb = emit_results(&b, db.path()).unwrap();
    assert_eq!(
        fs::read(&pa.summary).unwrap(),
        fs::read(&pb.summary).unwrap()
    );
    assert_eq!(fs::read(&pa.trace).unwrap(), fs::read(&pb.trace).unwrap());
}

#[test]
fn seeds_follow_base() {
    let exp = run_experiment(&spring_cfg(3)).unwrap();
    let seeds: Vec<u64> = exp.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![42, 43, 44]);
}

#[test]
fn single_run_summary() {
    let exp = run_experiment(&spring_cfg(1)).unwrap();
    let s = &exp.summary;
    assert_eq!(s.best_f, s.mean_f);
    assert_eq!(s.best_f, s.median_f);
    assert_eq!(s.best_f, s.worst_f);
    assert_eq!(s.std_f, 0.0);
}

#[test]
fn all_infeasible_is_flagged() {
    let mut cfg = ExperimentConfig::new("toy-infeasible");
    cfg.num_runs = 3;
    cfg.ga.max_generations = 10;
    let exp = run_experiment(&cfg).unwrap();
    assert_eq!(exp.summary.basis, SummaryBasis::ConstraintViolation);
    assert_eq!(exp.summary.feasible_run_count, 0);
    assert!(exp.summary.best_f > 0.0);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_results(&exp, dir.path()).unwrap();
    let text = fs::read_to_string(paths.summary).unwrap();
    assert!(text.contains("\"basis\": \"constraint_violation\""));
}

#[test]
fn errors() {
    assert!(matches!(
        run_experiment(&ExperimentConfig::new("nope")),
        Err(HarnessError::UnknownProblem(_))
    ));
    let mut cfg = spring_cfg(0);
    cfg.num_runs = 0;
    assert!(matches!(run_experiment(&cfg), Err(HarnessError::NoRuns)));
    let mut cfg = spring_cfg(1);
    cfg.ga.n_mut = 0;
    assert!(matches!(
        run_experiment(&cfg),
        Err(HarnessError::Engine { run_id: 0, .. })
    ));
}
