//! Penalty-based constraint handlers used as baselines.
//!
//! Each handler maps an evaluated individual to a scalar `psi`; lower is
//! better. A feasible individual always scores exactly its objective value.

use std::cmp::Ordering;

use thiserror::Error;

use crate::problem::EvaluatedIndividual;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PenaltyConfigError {
    #[error("static penalty needs at least one level")]
    NoLevels,
    #[error("static penalty thresholds must be strictly increasing")]
    ThresholdsNotIncreasing,
    #[error("static penalty coefficients must be non-negative and non-decreasing")]
    BadCoefficients,
    #[error("dynamic penalty multiplier C must be positive, got {0}")]
    NonPositiveMultiplier(f64),
    #[error("dynamic penalty equality band must be non-negative, got {0}")]
    NegativeEpsilon(f64),
}

/// A violation band: applies to violations up to and including `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyLevel {
    pub threshold: f64,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticPenaltyConfig {
    pub levels: Vec<PenaltyLevel>,
}

impl Default for StaticPenaltyConfig {
    fn default() -> Self {
        Self::single(1e6)
    }
}

impl StaticPenaltyConfig {
    pub fn single(coefficient: f64) -> Self {
        Self {
            levels: vec![PenaltyLevel {
                threshold: f64::INFINITY,
                coefficient,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), PenaltyConfigError> {
        if self.levels.is_empty() {
            return Err(PenaltyConfigError::NoLevels);
        }
        for pair in self.levels.windows(2) {
            if pair[0].threshold >= pair[1].threshold {
                return Err(PenaltyConfigError::ThresholdsNotIncreasing);
            }
            if pair[0].coefficient > pair[1].coefficient {
                return Err(PenaltyConfigError::BadCoefficients);
            }
        }
        if self
            .levels
            .iter()
            .any(|l| l.coefficient.is_nan() || l.coefficient < 0.0)
        {
            return Err(PenaltyConfigError::BadCoefficients);
        }
        Ok(())
    }

    /// Coefficient of the first band whose threshold covers `violation`;
    /// the last band catches everything above.
    pub fn coefficient_for(&self, violation: f64) -> f64 {
        self.levels
            .iter()
            .find(|l| violation <= l.threshold)
            .or(self.levels.last())
            .map_or(0.0, |l| l.coefficient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicPenaltyConfig {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for DynamicPenaltyConfig {
    fn default() -> Self {
        Self {
            c: 0.5,
            alpha: 2.0,
            beta: 2.0,
            epsilon: crate::problem::DEFAULT_EPSILON,
        }
    }
}

impl DynamicPenaltyConfig {
    pub fn validate(&self) -> Result<(), PenaltyConfigError> {
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(PenaltyConfigError::NonPositiveMultiplier(self.c));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(PenaltyConfigError::NegativeEpsilon(self.epsilon));
        }
        Ok(())
    }
}

/// `f + sum_i A_k(i) * max(0, G_i)^2` over the normalized constraints.
pub fn static_penalty_fitness(ind: &EvaluatedIndividual, cfg: &StaticPenaltyConfig) -> f64 {
    if ind.feasible {
        return ind.f;
    }
    let penalty: f64 = ind
        .g
        .iter()
        .map(|&v| {
            let v = v.max(0.0);
            if v == 0.0 {
                0.0
            } else {
                cfg.coefficient_for(v) * v * v
            }
        })
        .sum();
    ind.f + penalty
}

/// Sum of `max(0, G_i)^beta` over inequality entries plus the raw residual
/// `|h_j|` of every equality outside the `epsilon` band.
pub fn severity(ind: &EvaluatedIndividual, beta: f64, epsilon: f64) -> f64 {
    let mut eq = ind.equality_residuals.iter().peekable();
    let mut total = 0.0;
    for (i, &v) in ind.g.iter().enumerate() {
        if let Some(&&(idx, residual)) = eq.peek() {
            if idx == i {
                eq.next();
                if residual > epsilon {
                    total += residual;
                }
                continue;
            }
        }
        if v > 0.0 {
            total += v.powf(beta);
        }
    }
    total
}

/// `f + (C * t)^alpha * severity`, for generation `t >= 1`.
pub fn dynamic_penalty_fitness(
    ind: &EvaluatedIndividual,
    generation: u64,
    cfg: &DynamicPenaltyConfig,
) -> f64 {
    if ind.feasible {
        return ind.f;
    }
    let svc = severity(ind, cfg.beta, cfg.epsilon);
    if svc == 0.0 {
        return ind.f;
    }
    let t = generation.max(1) as f64;
    ind.f + (cfg.c * t).powf(cfg.alpha) * svc
}

/// Largest objective among feasible individuals, or 0 when none is feasible.
pub fn worst_feasible_objective(population: &[EvaluatedIndividual]) -> f64 {
    population
        .iter()
        .filter(|ind| ind.feasible)
        .map(|ind| ind.f)
        .fold(None, |acc: Option<f64>, f| {
            Some(acc.map_or(f, |a| a.max(f)))
        })
        .unwrap_or(0.0)
}

pub fn deb_fitness(ind: &EvaluatedIndividual, f_worst: f64) -> f64 {
    if ind.feasible {
        ind.f
    } else {
        f_worst + ind.cv
    }
}

/// `Less` means `a` wins.
pub fn deb_compare(a: &EvaluatedIndividual, b: &EvaluatedIndividual, f_worst: f64) -> Ordering {
    deb_fitness(a, f_worst).total_cmp(&deb_fitness(b, f_worst))
}
