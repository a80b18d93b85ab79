//! Constrained optimization with a real-coded genetic algorithm.
//!
//! The default constraint handler ranks individuals with feasibility rules
//! instead of penalties: the objective is never blended with constraint
//! violation. Static, dynamic and Deb-style penalty handlers are available
//! as baselines in the same loop.
//!
//! ```
//! use vch::{benchmarks, engine::{self, GaConfig}};
//!
//! let entry = benchmarks::toy_linear();
//! let result = engine::run(&entry.problem, &GaConfig::default().with_seed(7)).unwrap();
//! assert!(result.best.feasible);
//! assert!((result.best.f - 1.0).abs() < 1e-3);
//! ```

pub mod benchmarks;
pub mod cli;
pub mod engine;
pub mod harness;
pub mod penalty;
pub mod problem;

pub use engine::{run, GaConfig, Handler, Mutation, RunResult, StopReason};
pub use problem::{ConstraintSpec, EvaluatedIndividual, Problem, VariableSpec};
