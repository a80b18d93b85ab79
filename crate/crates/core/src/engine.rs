//! Real-coded genetic algorithm with violation-based constraint handling.
//!
//! Each generation keeps `n_elite` elites unchanged, breeds `n_cross`
//! children by whole arithmetic crossover of two tournament winners, and
//! adds `n_mut` mutants, by default non-uniform perturbations of the best.
//! The population is then sorted with the active comparator. Under the
//! default handler that comparator never mixes objective and violation:
//! feasible beats infeasible, feasible pairs compare on `f`, infeasible pairs
//! on the fraction of violated constraints and then on the total violation.

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::penalty::{
    deb_compare, dynamic_penalty_fitness, static_penalty_fitness, worst_feasible_objective,
    DynamicPenaltyConfig, PenaltyConfigError, StaticPenaltyConfig,
};
use crate::problem::{EvalCounter, EvaluatedIndividual, Problem, VariableSpec};

/// Attempts per population slot before feasible initialization gives up.
pub const FEASIBLE_INIT_ATTEMPTS: usize = 10_000;

/// Guard against division by zero in the relative-change test.
const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("n_elite + n_cross + n_mut = {sum} but pop_num = {pop_num}")]
    SizeMismatch { sum: usize, pop_num: usize },
    #[error("pop_num must be at least 2")]
    PopulationTooSmall,
    #[error("n_elite must be at least 1")]
    NoElite,
    #[error("tournament_size must be at least 2")]
    TournamentTooSmall,
    #[error("stop_patience must be at least 1")]
    NoPatience,
    #[error("stop_tolerance must be positive")]
    BadTolerance,
    #[error("max_evaluations ({max}) cannot cover the initial population ({pop_num})")]
    BudgetTooSmall { max: u64, pop_num: usize },
    #[error("non-uniform mutation shape must be a non-negative number, got {0}")]
    BadMutationShape(f64),
    #[error(transparent)]
    Penalty(#[from] PenaltyConfigError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("no feasible point found for slot {slot} after {attempts} attempts")]
    FeasibleInitExhausted { slot: usize, attempts: usize },
}

/// Constraint-handling strategy plugged into selection, elitism and sorting.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Handler {
    #[default]
    Vch,
    StaticPenalty(StaticPenaltyConfig),
    DynamicPenalty(DynamicPenaltyConfig),
    DebRule,
}

impl Handler {
    pub fn name(&self) -> &'static str {
        match self {
            Handler::Vch => "vch",
            Handler::StaticPenalty(_) => "static-penalty",
            Handler::DynamicPenalty(_) => "dynamic-penalty",
            Handler::DebRule => "deb",
        }
    }

    /// Parses a handler name, using default parameters for penalty handlers.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "vch" => Some(Handler::Vch),
            "static-penalty" => Some(Handler::StaticPenalty(StaticPenaltyConfig::default())),
            "dynamic-penalty" => Some(Handler::DynamicPenalty(DynamicPenaltyConfig::default())),
            "deb" => Some(Handler::DebRule),
            _ => None,
        }
    }
}

/// How the `n_mut` mutants of each generation are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mutation {
    /// A fresh uniform point in the bounds.
    Uniform,
    /// Non-uniform perturbation of every coordinate of the current best.
    /// Step sizes shrink to zero over `horizon` generations; `shape` controls
    /// how fast.
    NonUniform { shape: f64, horizon: u64 },
}

impl Default for Mutation {
    fn default() -> Self {
        Mutation::NonUniform {
            shape: 5.0,
            horizon: 275,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub pop_num: usize,
    pub n_elite: usize,
    pub n_cross: usize,
    pub n_mut: usize,
    pub max_generations: u64,
    /// Relative change of the best design vector regarded as converged.
    pub stop_tolerance: f64,
    /// Consecutive generations the change must stay below tolerance.
    pub stop_patience: usize,
    pub max_evaluations: u64,
    pub seed: u64,
    pub handler: Handler,
    pub feasible_init: bool,
    pub tournament_size: usize,
    pub mutation: Mutation,
}

impl Default for GaConfig {
    /// 100 individuals: 1 elite, 79 crossovers, 20 mutants; 500 generations;
    /// relative tolerance 1e-6 held for 60 generations.
    fn default() -> Self {
        Self {
            pop_num: 100,
            n_elite: 1,
            n_cross: 79,
            n_mut: 20,
            max_generations: 500,
            stop_tolerance: 1e-6,
            stop_patience: 60,
            max_evaluations: 50_000,
            seed: 0,
            handler: Handler::Vch,
            feasible_init: false,
            tournament_size: 2,
            mutation: Mutation::default(),
        }
    }
}

impl GaConfig {
    /// The original layout: 94 crossovers and 5 uniform mutants per
    /// generation, stopping after 25 stalled generations.
    pub fn classic() -> Self {
        Self {
            n_cross: 94,
            n_mut: 5,
            stop_patience: 25,
            mutation: Mutation::Uniform,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_handler(mut self, handler: Handler) -> Self {
        self.handler = handler;
        self
    }

    pub fn evaluations_per_generation(&self) -> u64 {
        (self.n_cross + self.n_mut) as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pop_num < 2 {
            return Err(ConfigError::PopulationTooSmall);
        }
        let sum = self.n_elite + self.n_cross + self.n_mut;
        if sum != self.pop_num {
            return Err(ConfigError::SizeMismatch {
                sum,
                pop_num: self.pop_num,
            });
        }
        if self.n_elite < 1 {
            return Err(ConfigError::NoElite);
        }
        if self.tournament_size < 2 {
            return Err(ConfigError::TournamentTooSmall);
        }
        if self.stop_patience < 1 {
            return Err(ConfigError::NoPatience);
        }
        if self.stop_tolerance.is_nan() || self.stop_tolerance <= 0.0 {
            return Err(ConfigError::BadTolerance);
        }
        if self.max_evaluations < self.pop_num as u64 {
            return Err(ConfigError::BudgetTooSmall {
                max: self.max_evaluations,
                pop_num: self.pop_num,
            });
        }
        if let Mutation::NonUniform { shape, .. } = self.mutation {
            if !(shape >= 0.0 && shape.is_finite()) {
                return Err(ConfigError::BadMutationShape(shape));
            }
        }
        match &self.handler {
            Handler::StaticPenalty(cfg) => cfg.validate()?,
            Handler::DynamicPenalty(cfg) => cfg.validate()?,
            Handler::Vch | Handler::DebRule => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxGenerations,
    EvalBudget,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxGenerations => "max-generations",
            StopReason::EvalBudget => "eval-budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTrace {
    pub generation: u64,
    pub best_f: f64,
    pub best_feasible: bool,
    /// Mean `cv` over the elite slots.
    pub avg_cv_elites: f64,
    pub num_feasible: usize,
    pub evals_so_far: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub best: EvaluatedIndividual,
    /// One entry per generation, starting with the initial population
    /// (generation 0).
    pub trace: Vec<GenerationTrace>,
    /// Evaluations of population members: `pop_num + generations_run * (n_cross + n_mut)`.
    pub total_evaluations: u64,
    /// Points rejected while building a feasible initial population.
    pub rejected_init_evaluations: u64,
    pub generations_run: u64,
    pub wall_time_ms: f64,
    pub stop_reason: StopReason,
}

/// Comparator for one generation. Penalty handlers depend on the
/// generation number or on the current population, so a `Ranking` is
/// rebuilt whenever those change.
#[derive(Debug, Clone, Copy)]
pub enum Ranking<'a> {
    Vch,
    Static(&'a StaticPenaltyConfig),
    Dynamic {
        cfg: &'a DynamicPenaltyConfig,
        generation: u64,
    },
    Deb {
        f_worst: f64,
    },
}

impl<'a> Ranking<'a> {
    pub fn new(handler: &'a Handler, population: &[EvaluatedIndividual], generation: u64) -> Self {
        match handler {
            Handler::Vch => Ranking::Vch,
            Handler::StaticPenalty(cfg) => Ranking::Static(cfg),
            Handler::DynamicPenalty(cfg) => Ranking::Dynamic {
                cfg,
                generation: generation + 1,
            },
            Handler::DebRule => Ranking::Deb {
                f_worst: worst_feasible_objective(population),
            },
        }
    }

    /// `Less` means `a` is better.
    pub fn compare(&self, a: &EvaluatedIndividual, b: &EvaluatedIndividual) -> Ordering {
        match *self {
            Ranking::Vch => compare_vch(a, b),
            Ranking::Static(cfg) => {
                static_penalty_fitness(a, cfg).total_cmp(&static_penalty_fitness(b, cfg))
            }
            Ranking::Dynamic { cfg, generation } => dynamic_penalty_fitness(a, generation, cfg)
                .total_cmp(&dynamic_penalty_fitness(b, generation, cfg)),
            Ranking::Deb { f_worst } => deb_compare(a, b, f_worst),
        }
    }
}

/// Feasibility-rule comparison. `Less` means `a` wins.
///
/// 1. feasible beats infeasible;
/// 2. two feasible individuals compare on `f`;
/// 3. two infeasible individuals compare on `nv`;
/// 4. then on `cv`.
///
/// Remaining ties fall back to `f`, then `Equal`.
pub fn compare_vch(a: &EvaluatedIndividual, b: &EvaluatedIndividual) -> Ordering {
    match (a.feasible, b.feasible) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.f.total_cmp(&b.f),
        (false, false) => {
            a.nv.total_cmp(&b.nv)
                .then_with(|| a.cv.total_cmp(&b.cv))
                .then_with(|| a.f.total_cmp(&b.f))
        }
    }
}

/// Stable sort, best first.
pub fn sort_population(population: &mut [EvaluatedIndividual], ranking: &Ranking<'_>) {
    population.sort_by(|a, b| ranking.compare(a, b));
}

/// Tournament with replacement; ties go to the earlier draw.
pub fn select_parent<'p, R: Rng + ?Sized>(
    population: &'p [EvaluatedIndividual],
    tournament_size: usize,
    ranking: &Ranking<'_>,
    rng: &mut R,
) -> &'p EvaluatedIndividual {
    let mut winner = &population[rng.gen_range(0..population.len())];
    for _ in 1..tournament_size {
        let challenger = &population[rng.gen_range(0..population.len())];
        if ranking.compare(challenger, winner) == Ordering::Less {
            winner = challenger;
        }
    }
    winner
}

/// `a * phi + b * (1 - phi)`, kept inside the per-coordinate hull of the
/// parents.
pub fn blend(a: &[f64], b: &[f64], phi: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| {
            if ai == bi {
                ai
            } else {
                (ai * phi + bi * (1.0 - phi)).clamp(ai.min(bi), ai.max(bi))
            }
        })
        .collect()
}

/// Whole arithmetic crossover with a single `phi ~ U(0,1)` for the vector,
/// snapped to the variable grids.
pub fn arithmetic_crossover<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    variables: &[VariableSpec],
    rng: &mut R,
) -> Vec<f64> {
    let phi: f64 = rng.gen();
    crate::problem::snap_discrete(&blend(a, b, phi), variables)
}

/// A fresh uniform point in the bounds, drawn like the initial population.
pub fn mutate_individual<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> Vec<f64> {
    problem.random_point(rng)
}

/// Moves every coordinate of `x` towards a randomly chosen bound by
/// `y * (1 - r^((1 - t/horizon)^shape))`, where `y` is the distance to that
/// bound and `r ~ U(0,1)`. Past the horizon the point is returned unchanged.
pub fn non_uniform_mutation<R: Rng + ?Sized>(
    x: &[f64],
    variables: &[VariableSpec],
    generation: u64,
    shape: f64,
    horizon: u64,
    rng: &mut R,
) -> Vec<f64> {
    let frac = if horizon == 0 {
        1.0
    } else {
        (generation as f64 / horizon as f64).min(1.0)
    };
    let exponent = (1.0 - frac).powf(shape);
    x.iter()
        .zip(variables)
        .map(|(&v, spec)| {
            let r: f64 = rng.gen();
            let delta = |y: f64| y * (1.0 - r.powf(exponent));
            let moved = if rng.gen::<bool>() {
                v + delta(spec.upper - v)
            } else {
                v - delta(v - spec.lower)
            };
            moved.clamp(spec.lower, spec.upper)
        })
        .collect()
}

fn cv_then_f(a: &EvaluatedIndividual, b: &EvaluatedIndividual) -> Ordering {
    a.cv.total_cmp(&b.cv).then_with(|| a.f.total_cmp(&b.f))
}

/// The infeasible individual with the lowest `cv`, ties broken by `f`.
pub fn retain_infeasible_elite(population: &[EvaluatedIndividual]) -> Option<&EvaluatedIndividual> {
    population
        .iter()
        .filter(|ind| !ind.feasible)
        .min_by(|a, b| cv_then_f(a, b))
}

pub fn initialize_population<R: Rng + ?Sized>(
    problem: &Problem,
    config: &GaConfig,
    rng: &mut R,
    counter: &mut EvalCounter,
    rejected: &mut u64,
) -> Result<Vec<EvaluatedIndividual>, EngineError> {
    let mut population = Vec::with_capacity(config.pop_num);
    for slot in 0..config.pop_num {
        if !config.feasible_init {
            population.push(problem.evaluate_or_worst(problem.random_point(rng), counter));
            continue;
        }
        let mut scratch = EvalCounter::new();
        let mut accepted = None;
        for _ in 0..FEASIBLE_INIT_ATTEMPTS {
            let ind = problem.evaluate_or_worst(problem.random_point(rng), &mut scratch);
            if ind.feasible {
                accepted = Some(ind);
                break;
            }
        }
        let attempts = scratch.count();
        match accepted {
            Some(ind) => {
                *rejected += attempts - 1;
                counter.bump();
                population.push(ind);
            }
            None => {
                return Err(EngineError::FeasibleInitExhausted {
                    slot,
                    attempts: attempts as usize,
                })
            }
        }
    }
    Ok(population)
}

/// Largest relative change of any coordinate between two design vectors.
pub fn relative_change(previous: &[f64], current: &[f64]) -> f64 {
    previous
        .iter()
        .zip(current)
        .map(|(&p, &c)| (c - p).abs() / p.abs().max(RELATIVE_FLOOR))
        .fold(0.0, f64::max)
}

/// True when each of the last `stop_patience` generation-to-generation
/// changes of the best design vector stayed below `stop_tolerance`.
pub fn check_stop(best_history: &[Vec<f64>], config: &GaConfig) -> bool {
    let patience = config.stop_patience;
    if best_history.len() < patience + 1 {
        return false;
    }
    best_history[best_history.len() - patience - 1..]
        .windows(2)
        .all(|w| relative_change(&w[0], &w[1]) < config.stop_tolerance)
}

/// Decides whether the run ends after `generation` generations with
/// `evaluations` spent so far.
pub fn stop_reason(
    best_history: &[Vec<f64>],
    generation: u64,
    evaluations: u64,
    config: &GaConfig,
) -> Option<StopReason> {
    if check_stop(best_history, config) {
        Some(StopReason::Converged)
    } else if generation >= config.max_generations {
        Some(StopReason::MaxGenerations)
    } else if evaluations + config.evaluations_per_generation() > config.max_evaluations {
        Some(StopReason::EvalBudget)
    } else {
        None
    }
}

/// Mutable state of a run between generations.
#[derive(Debug, Clone)]
pub struct RunState {
    /// Sorted, best first.
    pub population: Vec<EvaluatedIndividual>,
    pub generation: u64,
    pub counter: EvalCounter,
    pub rng: ChaCha8Rng,
}

impl RunState {
    pub fn new(
        problem: &Problem,
        config: &GaConfig,
        rejected: &mut u64,
    ) -> Result<Self, EngineError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut counter = EvalCounter::new();
        let mut population =
            initialize_population(problem, config, &mut rng, &mut counter, rejected)?;
        let ranking = Ranking::new(&config.handler, &population, 0);
        sort_population(&mut population, &ranking);
        Ok(Self {
            population,
            generation: 0,
            counter,
            rng,
        })
    }

    pub fn best(&self) -> &EvaluatedIndividual {
        &self.population[0]
    }

    pub fn trace(&self, config: &GaConfig) -> GenerationTrace {
        let elites = &self.population[..config.n_elite];
        GenerationTrace {
            generation: self.generation,
            best_f: self.population[0].f,
            best_feasible: self.population[0].feasible,
            avg_cv_elites: elites.iter().map(|e| e.cv).sum::<f64>() / elites.len() as f64,
            num_feasible: self.population.iter().filter(|i| i.feasible).count(),
            evals_so_far: self.counter.count(),
        }
    }
}

/// Builds the next generation in place.
pub fn step_generation(problem: &Problem, config: &GaConfig, state: &mut RunState) {
    let old = &state.population;
    let ranking = Ranking::new(&config.handler, old, state.generation);
    let rng = &mut state.rng;
    let counter = &mut state.counter;

    let mut next = Vec::with_capacity(config.pop_num);
    next.extend(old[..config.n_elite].iter().cloned());
    for _ in 0..config.n_cross {
        let a = select_parent(old, config.tournament_size, &ranking, rng);
        let b = select_parent(old, config.tournament_size, &ranking, rng);
        let child = arithmetic_crossover(&a.x, &b.x, problem.variables(), rng);
        next.push(problem.evaluate_or_worst(child, counter));
    }
    for _ in 0..config.n_mut {
        let mutant = match config.mutation {
            Mutation::Uniform => mutate_individual(problem, rng),
            Mutation::NonUniform { shape, horizon } => {
                let x = non_uniform_mutation(
                    &old[0].x,
                    problem.variables(),
                    state.generation,
                    shape,
                    horizon,
                    rng,
                );
                problem.snap(&x)
            }
        };
        next.push(problem.evaluate_or_worst(mutant, counter));
    }

    let next_generation = state.generation + 1;
    let next_ranking = Ranking::new(&config.handler, &next, next_generation);
    if let Some(keep) = retain_infeasible_elite(old) {
        let covered = next
            .iter()
            .any(|ind| !ind.feasible && cv_then_f(ind, keep) != Ordering::Greater);
        if !covered && next.len() > config.n_elite {
            let worst = (config.n_elite..next.len())
                .max_by(|&i, &j| next_ranking.compare(&next[i], &next[j]).then(i.cmp(&j)))
                .expect("non-elite slots exist");
            next[worst] = keep.clone();
        }
    }

    // f_worst for Deb's rule may have moved after the injection
    let next_ranking = Ranking::new(&config.handler, &next, next_generation);
    sort_population(&mut next, &next_ranking);
    state.population = next;
    state.generation = next_generation;
}

pub fn run(problem: &Problem, config: &GaConfig) -> Result<RunResult, EngineError> {
    config.validate()?;
    let started = Instant::now();
    let mut rejected = 0;
    let mut state = RunState::new(problem, config, &mut rejected)?;

    let mut best = state.best().clone();
    let mut trace = vec![state.trace(config)];
    let mut history = vec![best.x.clone()];

    let stop = loop {
        if let Some(reason) = stop_reason(&history, state.generation, state.counter.count(), config)
        {
            break reason;
        }
        step_generation(problem, config, &mut state);
        let ranking = Ranking::new(&config.handler, &state.population, state.generation);
        if ranking.compare(state.best(), &best) == Ordering::Less {
            best = state.best().clone();
        }
        trace.push(state.trace(config));
        history.push(state.best().x.clone());
    };

    Ok(RunResult {
        seed: config.seed,
        best,
        trace,
        total_evaluations: state.counter.count(),
        rejected_init_evaluations: rejected,
        generations_run: state.generation,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        stop_reason: stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ConstraintSpec, VariableSpec};

    fn ind(f: f64, cv: f64, nv: f64) -> EvaluatedIndividual {
        EvaluatedIndividual {
            x: vec![f],
            f,
            g: vec![],
            cv,
            nv,
            feasible: cv == 0.0,
            equality_residuals: vec![],
        }
    }

    fn unit_square() -> Problem {
        Problem::builder("square")
            .variables([VariableSpec::continuous(0.0, 1.0); 2])
            .objective(|x| x[0] + x[1])
            .constraint(ConstraintSpec::at_least("sum", 1.0, |x| x[0] + x[1]))
            .build()
            .unwrap()
    }

    #[test]
    fn vch_rules() {
        assert_eq!(
            compare_vch(&ind(5.0, 0.0, 0.0), &ind(1.0, 0.01, 0.25)),
            Ordering::Less
        );
        assert_eq!(
            compare_vch(&ind(0.0, 10.0, 0.25), &ind(0.0, 0.1, 0.5)),
            Ordering::Less
        );
        assert_eq!(
            compare_vch(&ind(9.0, 0.2, 0.5), &ind(0.0, 0.3, 0.5)),
            Ordering::Less
        );
        assert_eq!(
            compare_vch(&ind(1.0, 0.0, 0.0), &ind(2.0, 0.0, 0.0)),
            Ordering::Less
        );
        assert_eq!(
            compare_vch(&ind(1.0, 0.3, 0.5), &ind(2.0, 0.3, 0.5)),
            Ordering::Less
        );
        assert_eq!(
            compare_vch(&ind(1.0, 0.3, 0.5), &ind(1.0, 0.3, 0.5)),
            Ordering::Equal
        );
    }

    #[test]
    fn sort_puts_feasible_first() {
        let mut pop = vec![ind(-1e6, 0.5, 0.1), ind(10.0, 0.0, 0.0)];
        sort_population(&mut pop, &Ranking::Vch);
        assert!(pop[0].feasible);

        let mut all = vec![ind(3.0, 0.0, 0.0), ind(1.0, 0.0, 0.0), ind(2.0, 0.0, 0.0)];
        sort_population(&mut all, &Ranking::Vch);
        let fs: Vec<f64> = all.iter().map(|i| i.f).collect();
        assert_eq!(fs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn blend_examples() {
        assert_eq!(blend(&[0.0, 0.0], &[1.0, 2.0], 0.25), vec![0.75, 1.5]);
        let a = [0.3, 0.7, 1e-9];
        let b = [0.1, 123.0, -5.0];
        assert_eq!(blend(&a, &b, 1.0), a.to_vec());
        assert_eq!(blend(&a, &a, 0.37), a.to_vec());
    }

    #[test]
    fn infeasible_elite_rule() {
        assert!(retain_infeasible_elite(&[ind(1.0, 0.0, 0.0)]).is_none());
        let pop = [
            ind(5.0, 0.1, 0.5),
            ind(3.0, 0.1, 0.5),
            ind(1.0, 0.5, 0.5),
            ind(0.0, 0.0, 0.0),
        ];
        let kept = retain_infeasible_elite(&pop).unwrap();
        assert_eq!((kept.cv, kept.f), (0.1, 3.0));
        let single = [ind(7.0, 2.0, 1.0)];
        assert_eq!(retain_infeasible_elite(&single).unwrap().f, 7.0);
    }

    #[test]
    fn stop_criterion() {
        let cfg = GaConfig {
            stop_patience: 3,
            ..GaConfig::default()
        };
        let same = vec![vec![1.0, 0.0]; 4];
        assert!(check_stop(&same, &cfg));
        assert!(!check_stop(&same[..3], &cfg));
        assert_eq!(relative_change(&[0.0], &[0.0]), 0.0);

        let growing: Vec<Vec<f64>> = (0..10).map(|i| vec![1.1f64.powi(i)]).collect();
        assert!(!check_stop(&growing, &cfg));
        assert_eq!(
            stop_reason(&growing, 500, 0, &cfg),
            Some(StopReason::MaxGenerations)
        );
        assert_eq!(
            stop_reason(&growing, 10, 49_990, &cfg),
            Some(StopReason::EvalBudget)
        );
        assert_eq!(stop_reason(&growing, 10, 100, &cfg), None);
        assert_eq!(
            stop_reason(&same, 500, 100, &cfg),
            Some(StopReason::Converged)
        );
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig::classic().validate().is_ok());
        let bad = GaConfig {
            n_mut: 21,
            ..GaConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(ConfigError::SizeMismatch {
                sum: 101,
                pop_num: 100
            })
        ));
        let bad = GaConfig {
            tournament_size: 1,
            ..GaConfig::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::TournamentTooSmall));
        let bad = GaConfig {
            n_elite: 0,
            n_cross: 80,
            ..GaConfig::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::NoElite));
        let bad = GaConfig::default().with_handler(Handler::DynamicPenalty(DynamicPenaltyConfig {
            c: -1.0,
            ..Default::default()
        }));
        assert!(matches!(bad.validate(), Err(ConfigError::Penalty(_))));
        let bad = GaConfig {
            mutation: Mutation::NonUniform {
                shape: -1.0,
                horizon: 10,
            },
            ..GaConfig::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::BadMutationShape(-1.0)));
    }

    #[test]
    fn non_uniform_steps_shrink() {
        let vars = [VariableSpec::continuous(0.0, 10.0); 3];
        let x = [2.0, 5.0, 9.0];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean_step = |generation: u64, rng: &mut ChaCha8Rng| {
            let mut total = 0.0;
            for _ in 0..2000 {
                let y = non_uniform_mutation(&x, &vars, generation, 5.0, 100, rng);
                for (k, v) in y.iter().enumerate() {
                    assert!((0.0..=10.0).contains(v));
                    total += (v - x[k]).abs();
                }
            }
            total / 6000.0
        };
        let early = mean_step(0, &mut rng);
        let late = mean_step(60, &mut rng);
        assert!(early > 1.0, "early {early}");
        assert!(late < early / 10.0, "early {early} late {late}");
        assert_eq!(
            non_uniform_mutation(&x, &vars, 100, 5.0, 100, &mut rng),
            x.to_vec()
        );
        assert_eq!(
            non_uniform_mutation(&x, &vars, 250, 5.0, 100, &mut rng),
            x.to_vec()
        );
    }

    #[test]
    fn elite_survives_unchanged() {
        let problem = unit_square();
        let cfg = GaConfig::default().with_seed(3);
        let mut rejected = 0;
        let mut state = RunState::new(&problem, &cfg, &mut rejected).unwrap();
        for _ in 0..20 {
            let before = state.best().clone();
            step_generation(&problem, &cfg, &mut state);
            assert_ne!(compare_vch(state.best(), &before), Ordering::Greater);
            assert!(
                state.population.iter().any(|i| i == &before)
                    || compare_vch(state.best(), &before) == Ordering::Less
            );
        }
        assert_eq!(state.counter.count(), 100 + 20 * 99);
    }

    #[test]
    fn infeasible_elite_is_injected() {
        // start from an all-infeasible population and make sure the
        // lowest-cv infeasible point of one generation is present in the next
        let problem = Problem::builder("far")
            .variables([VariableSpec::continuous(0.0, 1.0); 2])
            .objective(|x| x[0])
            .constraint(ConstraintSpec::at_least("x0", 2.0, |x| x[0]))
            .constraint(ConstraintSpec::at_least("x1", 2.0, |x| x[1]))
            .build()
            .unwrap();
        let cfg = GaConfig::default().with_seed(11);
        let mut rejected = 0;
        let mut state = RunState::new(&problem, &cfg, &mut rejected).unwrap();
        for _ in 0..5 {
            let keep = retain_infeasible_elite(&state.population).unwrap().clone();
            step_generation(&problem, &cfg, &mut state);
            assert!(state
                .population
                .iter()
                .any(|i| cv_then_f(i, &keep) != Ordering::Greater));
        }
    }

    #[test]
    fn feasible_init_exhaustion() {
        let problem = Problem::builder("none")
            .variable(VariableSpec::continuous(0.0, 1.0))
            .objective(|x| x[0])
            .constraint(ConstraintSpec::at_least("x", 2.0, |x| x[0]))
            .build()
            .unwrap();
        let cfg = GaConfig {
            feasible_init: true,
            ..GaConfig::default()
        };
        assert_eq!(
            run(&problem, &cfg).unwrap_err(),
            EngineError::FeasibleInitExhausted {
                slot: 0,
                attempts: FEASIBLE_INIT_ATTEMPTS
            }
        );
    }
}
