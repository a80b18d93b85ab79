use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vch::benchmarks::{self, PROBLEM_NAMES};
use vch::problem::{
    constraint_violation, rhs_scale, violation_count, EvalCounter, ProblemError, VariableSpec,
};
use vch::{ConstraintSpec, Problem};

#[test]
fn violation_measures_agree_on_benchmark_samples() {
    for name in PROBLEM_NAMES {
        let entry = benchmarks::by_name(name).unwrap();
        let problem = &entry.problem;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counter = EvalCounter::new();
        for _ in 0..100_000 {
            let x = problem.random_point(&mut rng);
            let ind = problem.evaluate(&x, &mut counter).unwrap();
            assert!(ind.f.is_finite(), "{name}: f not finite at {x:?}");
            assert!(
                ind.g.iter().all(|v| v.is_finite()),
                "{name}: G not finite at {x:?}"
            );
            assert_eq!(ind.cv == 0.0, ind.nv == 0.0, "{name} at {x:?}");
            assert_eq!(ind.cv == 0.0, ind.feasible, "{name} at {x:?}");
            assert_eq!(
                ind.feasible,
                problem.raw_feasible(&x),
                "{name} raw oracle at {x:?}"
            );
            assert!((0.0..=1.0).contains(&ind.nv));
        }
        assert_eq!(counter.count(), 100_000);
    }
}

#[test]
fn discrete_samples_lie_on_grid() {
    let entry = benchmarks::pressure_vessel();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let x = entry.problem.random_point(&mut rng);
        for &t in &x[..2] {
            let k = t / 0.0625;
            assert!((k - k.round()).abs() < 1e-9, "{t} off grid");
        }
        assert!(entry.problem.in_bounds(&x));
    }
}

#[test]
fn builder_rejects_bad_input() {
    let c = || ConstraintSpec::less_equal("c", 1.0, |x| x[0]);
    assert!(matches!(
        Problem::builder("p")
            .objective(|x| x[0])
            .constraint(c())
            .build(),
        Err(ProblemError::NoVariables)
    ));
    assert!(matches!(
        Problem::builder("p")
            .objective(|x| x[0])
            .variable(VariableSpec::continuous(0.0, 1.0))
            .build(),
        Err(ProblemError::EmptyConstraintSet)
    ));
    assert!(matches!(
        Problem::builder("p")
            .objective(|x| x[0])
            .variable(VariableSpec::continuous(2.0, 1.0))
            .constraint(c())
            .build(),
        Err(ProblemError::InvalidBounds { .. })
    ));
    let p = Problem::builder("p")
        .objective(|x| x[0])
        .variable(VariableSpec::continuous(0.0, 1.0))
        .constraint(c())
        .build()
        .unwrap();
    let mut counter = EvalCounter::new();
    assert!(matches!(
        p.evaluate(&[0.1, 0.2], &mut counter),
        Err(ProblemError::DimensionMismatch { .. })
    ));
    assert_eq!(counter.count(), 0);
}

#[test]
fn non_finite_objective_is_worst() {
    let p = Problem::builder("p")
        .objective(|x| 1.0 / x[0])
        .variable(VariableSpec::continuous(0.0, 1.0))
        .constraint(ConstraintSpec::less_equal("c", 1.0, |x| x[0] - 2.0))
        .build()
        .unwrap();
    let mut counter = EvalCounter::new();
    assert!(matches!(
        p.evaluate(&[0.0], &mut counter),
        Err(ProblemError::NonFiniteValue { .. })
    ));
    let worst = p.evaluate_or_worst(vec![0.0], &mut counter);
    assert!(!worst.feasible);
    assert_eq!(worst.cv, f64::INFINITY);
}

#[test]
fn normalization_examples() {
    // g(x) = x - 3 <= 0 against rhs 3: G = (x - 3) / 3
    let p = Problem::builder("p")
        .objective(|x| x[0])
        .variable(VariableSpec::continuous(0.0, 10.0))
        .constraint(ConstraintSpec::at_most("a", 3.0, |x| x[0]))
        .constraint(ConstraintSpec::equality("h", |x| x[0] - 5.0))
        .constraint(ConstraintSpec::between("b", 2.0, 8.0, |x| x[0]))
        .build()
        .unwrap();
    let mut counter = EvalCounter::new();
    let e = p.evaluate(&[6.0], &mut counter).unwrap();
    assert_eq!(e.g.len(), 4);
    assert!((e.g[0] - 1.0).abs() < 1e-12);
    assert!((e.g[1] - (1.0 / 1e-4 - 1.0)).abs() < 1e-6);
    assert!((e.g[2] - (6.0 - 8.0) / 8.0).abs() < 1e-12);
    assert!((e.g[3] - (2.0 - 6.0) / 2.0).abs() < 1e-12);
    assert!((e.nv - 0.5).abs() < 1e-12);
    assert_eq!(rhs_scale(0.0), 1.0);
    assert_eq!(rhs_scale(-4.0), 4.0);
}

fn grid_var() -> impl Strategy<Value = VariableSpec> {
    (
        -50.0f64..50.0,
        1u32..200,
        prop::sample::select(vec![0.0625, 0.1, 0.5, 1.0, 2.5]),
    )
        .prop_map(|(lo, n, step)| VariableSpec::discrete(lo, lo + n as f64 * step, step))
}

proptest! {
    #[test]
    fn cv_nv_zero_together(g in prop::collection::vec(-10.0f64..10.0, 1..20)) {
        let cv = constraint_violation(&g);
        let nv = violation_count(&g).unwrap();
        prop_assert_eq!(cv == 0.0, nv == 0.0);
        prop_assert!(cv >= 0.0);
        prop_assert!((0.0..=1.0).contains(&nv));
    }

    #[test]
    fn normalization_keeps_sign(rhs in -1e4f64..1e4, value in -1e4f64..1e4) {
        let p = Problem::builder("p")
            .objective(|_| 0.0)
            .variable(VariableSpec::continuous(-1e4, 1e4))
            .constraint(ConstraintSpec::at_most("le", rhs, |x| x[0]))
            .constraint(ConstraintSpec::at_least("ge", rhs, |x| x[0]))
            .build()
            .unwrap();
        let e = p.evaluate(&[value], &mut EvalCounter::new()).unwrap();
        let raw_le = value - rhs;
        prop_assert_eq!(e.g[0] > 0.0, raw_le > 0.0);
        prop_assert_eq!(e.g[0] < 0.0, raw_le < 0.0);
        prop_assert_eq!(e.g[1] > 0.0, -raw_le > 0.0);
    }

    #[test]
    fn equality_band(h in -1e-3f64..1e-3) {
        let p = Problem::builder("p")
            .objective(|_| 0.0)
            .variable(VariableSpec::continuous(-1.0, 1.0))
            .constraint(ConstraintSpec::equality("h", |x| x[0]))
            .build()
            .unwrap();
        let e = p.evaluate(&[h], &mut EvalCounter::new()).unwrap();
        prop_assert_eq!(e.feasible, h.abs() <= 1e-4);
    }

    #[test]
    fn snap_is_idempotent_and_on_grid(v in grid_var(), t in 0.0f64..1.0) {
        let x = v.lower + t * (v.upper - v.lower);
        let s = v.snap(x);
        prop_assert_eq!(v.snap(s), s);
        prop_assert!(v.contains(s));
        if let vch::problem::VariableKind::DiscreteStep(step) = v.kind {
            let k = (s - v.lower) / step;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!((s - x).abs() <= step / 2.0 + 1e-9);
        }
    }
}
