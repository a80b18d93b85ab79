//! Constrained problem definitions and the evaluation pipeline.
//!
//! A [`Problem`] owns an objective, variable bounds and a list of raw
//! constraints. At construction the constraints are expanded into a fixed list
//! of normalized inequalities `G_i <= 0`: equalities become `|h|/eps - 1`,
//! double bounds are split into an upper and a lower side, and plain
//! inequalities are divided by a positive scale. Evaluating a point yields an
//! [`EvaluatedIndividual`] carrying the objective, the normalized constraint
//! vector, the total violation (`cv`) and the fraction of violated
//! constraints (`nv`).

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Default band within which an equality residual counts as satisfied.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Shared, thread-safe scalar function of a decision vector.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("problem has no variables")]
    NoVariables,
    #[error("problem has no constraints")]
    EmptyConstraintSet,
    #[error("problem has no objective")]
    MissingObjective,
    #[error("variable {index}: lower bound {lower} must be below upper bound {upper}")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("variable {index}: step {step} must be positive and fit inside the bounds")]
    InvalidStep { index: usize, step: f64 },
    #[error("constraint `{name}`: scale {scale} must be finite and positive")]
    InvalidScale { name: String, scale: f64 },
    #[error("constraint `{name}`: lower bound {lower} must be below upper bound {upper}")]
    InvalidDoubleBound {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("equality tolerance {0} must be finite and positive")]
    InvalidEpsilon(f64),
    #[error("expected a decision vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{source_name} returned a non-finite value ({value})")]
    NonFiniteValue { source_name: String, value: f64 },
    #[error("violation count of an empty constraint vector")]
    EmptyViolationVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariableKind {
    Continuous,
    /// Values restricted to `lower + k * step` for integer `k`.
    DiscreteStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableSpec {
    pub lower: f64,
    pub upper: f64,
    pub kind: VariableKind,
}

impl VariableSpec {
    pub fn continuous(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            kind: VariableKind::Continuous,
        }
    }

    pub fn discrete(lower: f64, upper: f64, step: f64) -> Self {
        Self {
            lower,
            upper,
            kind: VariableKind::DiscreteStep(step),
        }
    }

    fn validate(&self, index: usize) -> Result<(), ProblemError> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(ProblemError::InvalidBounds {
                index,
                lower: self.lower,
                upper: self.upper,
            });
        }
        if let VariableKind::DiscreteStep(step) = self.kind {
            if !(step.is_finite() && step > 0.0 && self.upper - self.lower >= step) {
                return Err(ProblemError::InvalidStep { index, step });
            }
        }
        Ok(())
    }

    /// Moves `value` onto the variable's grid. Continuous variables pass
    /// through untouched. Discrete ones round half-up on the step index and
    /// never leave `[lower, upper]`.
    pub fn snap(&self, value: f64) -> f64 {
        match self.kind {
            VariableKind::Continuous => value,
            VariableKind::DiscreteStep(step) => {
                let max_index = ((self.upper - self.lower) / step + 1e-9).floor();
                let index = ((value - self.lower) / step + 0.5)
                    .floor()
                    .clamp(0.0, max_index);
                self.lower + index * step
            }
        }
    }

    /// Uniform draw `lower + (upper - lower) * U(0,1)`, snapped to the grid.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.snap(self.lower + (self.upper - self.lower) * u)
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }
}

/// Applies [`VariableSpec::snap`] coordinate-wise.
pub fn snap_discrete(x: &[f64], variables: &[VariableSpec]) -> Vec<f64> {
    x.iter()
        .zip(variables)
        .map(|(&value, spec)| spec.snap(value))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintKind {
    /// `g(x) <= 0`
    LessEqual,
    /// `h(x) = 0`, satisfied when `|h(x)| <= eps`
    Equality,
    /// `lower <= g(x) <= upper`
    Between { lower: f64, upper: f64 },
}

/// Scale used for a constraint whose natural right-hand side is `rhs`.
pub fn rhs_scale(rhs: f64) -> f64 {
    if rhs == 0.0 {
        1.0
    } else {
        rhs.abs()
    }
}

#[derive(Clone)]
pub struct ConstraintSpec {
    pub name: String,
    pub kind: ConstraintKind,
    pub evaluator: Evaluator,
    /// Normalization divisor for `LessEqual`. Unused for the other kinds,
    /// whose scales follow from their bounds and the problem tolerance.
    pub scale: f64,
}

impl fmt::Debug for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl ConstraintSpec {
    /// `g(x) <= 0`, normalized as `g(x) / scale`.
    pub fn less_equal<F>(name: impl Into<String>, scale: f64, g: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: ConstraintKind::LessEqual,
            evaluator: Arc::new(g),
            scale,
        }
    }

    /// `lhs(x) <= rhs`, stored as `lhs(x) - rhs` and scaled by `|rhs|`
    /// (or 1 when `rhs` is zero).
    pub fn at_most<F>(name: impl Into<String>, rhs: f64, lhs: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::less_equal(name, rhs_scale(rhs), move |x| lhs(x) - rhs)
    }

    /// `lhs(x) >= rhs`, stored as `rhs - lhs(x)` and scaled like [`Self::at_most`].
    pub fn at_least<F>(name: impl Into<String>, rhs: f64, lhs: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::less_equal(name, rhs_scale(rhs), move |x| rhs - lhs(x))
    }

    pub fn equality<F>(name: impl Into<String>, h: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: ConstraintKind::Equality,
            evaluator: Arc::new(h),
            scale: 1.0,
        }
    }

    pub fn between<F>(name: impl Into<String>, lower: f64, upper: f64, g: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: ConstraintKind::Between { lower, upper },
            evaluator: Arc::new(g),
            scale: 1.0,
        }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        match self.kind {
            ConstraintKind::LessEqual if !(self.scale.is_finite() && self.scale > 0.0) => {
                Err(ProblemError::InvalidScale {
                    name: self.name.clone(),
                    scale: self.scale,
                })
            }
            ConstraintKind::Between { lower, upper }
                if !(lower.is_finite() && upper.is_finite() && lower < upper) =>
            {
                Err(ProblemError::InvalidDoubleBound {
                    name: self.name.clone(),
                    lower,
                    upper,
                })
            }
            _ => Ok(()),
        }
    }

    /// Whether the raw value satisfies this constraint, with no normalization.
    pub fn raw_satisfied(&self, value: f64, epsilon: f64) -> bool {
        match self.kind {
            ConstraintKind::LessEqual => value <= 0.0,
            ConstraintKind::Equality => value.abs() <= epsilon,
            ConstraintKind::Between { lower, upper } => lower <= value && value <= upper,
        }
    }
}

/// How one normalized inequality is derived from a raw constraint value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizedForm {
    /// `g / scale`
    Scaled { scale: f64 },
    /// `|h| / eps - 1`
    EqualityBand { epsilon: f64 },
    /// `(g - bound) / scale`
    Upper { bound: f64, scale: f64 },
    /// `(bound - g) / scale`
    Lower { bound: f64, scale: f64 },
}

/// One entry of the expanded constraint list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedConstraint {
    /// Index of the raw constraint this entry came from.
    pub source: usize,
    pub form: NormalizedForm,
}

impl NormalizedConstraint {
    pub fn apply(&self, raw: f64) -> f64 {
        match self.form {
            NormalizedForm::Scaled { scale } => raw / scale,
            NormalizedForm::EqualityBand { epsilon } => raw.abs() / epsilon - 1.0,
            NormalizedForm::Upper { bound, scale } => (raw - bound) / scale,
            NormalizedForm::Lower { bound, scale } => (bound - raw) / scale,
        }
    }

    pub fn is_equality(&self) -> bool {
        matches!(self.form, NormalizedForm::EqualityBand { .. })
    }
}

/// Expands raw constraints into normalized inequalities, in declaration
/// order with the upper side of a double bound before its lower side.
pub fn expand_constraints(
    constraints: &[ConstraintSpec],
    epsilon: f64,
) -> Vec<NormalizedConstraint> {
    let mut out = Vec::with_capacity(constraints.len());
    for (source, spec) in constraints.iter().enumerate() {
        match spec.kind {
            ConstraintKind::LessEqual => out.push(NormalizedConstraint {
                source,
                form: NormalizedForm::Scaled { scale: spec.scale },
            }),
            ConstraintKind::Equality => out.push(NormalizedConstraint {
                source,
                form: NormalizedForm::EqualityBand { epsilon },
            }),
            ConstraintKind::Between { lower, upper } => {
                out.push(NormalizedConstraint {
                    source,
                    form: NormalizedForm::Upper {
                        bound: upper,
                        scale: rhs_scale(upper),
                    },
                });
                out.push(NormalizedConstraint {
                    source,
                    form: NormalizedForm::Lower {
                        bound: lower,
                        scale: rhs_scale(lower),
                    },
                });
            }
        }
    }
    out
}

/// Sum of positive parts of `g`.
pub fn constraint_violation(g: &[f64]) -> f64 {
    g.iter().map(|&v| v.max(0.0)).sum()
}

/// Fraction of strictly positive entries of `g`.
pub fn violation_count(g: &[f64]) -> Result<f64, ProblemError> {
    if g.is_empty() {
        return Err(ProblemError::EmptyViolationVector);
    }
    let violated = g.iter().filter(|&&v| v > 0.0).count();
    Ok(violated as f64 / g.len() as f64)
}

/// Number of point evaluations performed during one run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct EvalCounter(u64);

impl EvalCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    pub(crate) fn bump(&mut self) {
        self.0 += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedIndividual {
    pub x: Vec<f64>,
    pub f: f64,
    /// Normalized constraint values; feasible iff every entry is `<= 0`.
    pub g: Vec<f64>,
    pub cv: f64,
    pub nv: f64,
    pub feasible: bool,
    /// `(index into g, |h|)` for every equality-derived entry.
    pub equality_residuals: Vec<(usize, f64)>,
}

impl EvaluatedIndividual {
    /// Stand-in for a point whose objective or constraints were not finite.
    /// It loses every comparison.
    pub fn non_finite(x: Vec<f64>, num_constraints: usize) -> Self {
        Self {
            x,
            f: f64::INFINITY,
            g: vec![f64::INFINITY; num_constraints],
            cv: f64::INFINITY,
            nv: 1.0,
            feasible: false,
            equality_residuals: Vec::new(),
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub struct ProblemBuilder {
    name: String,
    objective: Option<Evaluator>,
    variables: Vec<VariableSpec>,
    constraints: Vec<ConstraintSpec>,
    epsilon: f64,
}

impl ProblemBuilder {
    pub fn objective<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.objective = Some(Arc::new(f));
        self
    }

    pub fn variable(mut self, spec: VariableSpec) -> Self {
        self.variables.push(spec);
        self
    }

    pub fn variables(mut self, specs: impl IntoIterator<Item = VariableSpec>) -> Self {
        self.variables.extend(specs);
        self
    }

    pub fn constraint(mut self, spec: ConstraintSpec) -> Self {
        self.constraints.push(spec);
        self
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn build(self) -> Result<Problem, ProblemError> {
        let objective = self.objective.ok_or(ProblemError::MissingObjective)?;
        if self.variables.is_empty() {
            return Err(ProblemError::NoVariables);
        }
        if self.constraints.is_empty() {
            return Err(ProblemError::EmptyConstraintSet);
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(ProblemError::InvalidEpsilon(self.epsilon));
        }
        for (index, spec) in self.variables.iter().enumerate() {
            spec.validate(index)?;
        }
        for spec in &self.constraints {
            spec.validate()?;
        }
        let normalized = expand_constraints(&self.constraints, self.epsilon);
        Ok(Problem {
            name: self.name,
            objective,
            variables: self.variables,
            constraints: self.constraints,
            normalized,
            epsilon: self.epsilon,
        })
    }
}

/// A minimization problem with bounded variables and inequality, equality
/// or double-bounded constraints. Immutable once built.
#[derive(Clone)]
pub struct Problem {
    name: String,
    objective: Evaluator,
    variables: Vec<VariableSpec>,
    constraints: Vec<ConstraintSpec>,
    normalized: Vec<NormalizedConstraint>,
    epsilon: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("variables", &self.variables)
            .field("constraints", &self.constraints)
            .field("epsilon", &self.epsilon)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn builder(name: impl Into<String>) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            objective: None,
            variables: Vec::new(),
            constraints: Vec::new(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The expanded list of normalized inequalities (length `n + m`).
    pub fn normalized_constraints(&self) -> &[NormalizedConstraint] {
        &self.normalized
    }

    pub fn num_normalized(&self) -> usize {
        self.normalized.len()
    }

    pub fn snap(&self, x: &[f64]) -> Vec<f64> {
        snap_discrete(x, &self.variables)
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.variables.len()
            && x.iter()
                .zip(&self.variables)
                .all(|(&v, spec)| spec.contains(v))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.variables.iter().map(|spec| spec.sample(rng)).collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    /// Raw constraint values in declaration order, without normalization.
    pub fn raw_constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| (c.evaluator)(x)).collect()
    }

    /// Feasibility judged on raw constraint values only.
    pub fn raw_feasible(&self, x: &[f64]) -> bool {
        self.constraints
            .iter()
            .all(|c| c.raw_satisfied((c.evaluator)(x), self.epsilon))
    }

    /// Evaluates the objective and every constraint at `x` and bumps
    /// `counter` once.
    pub fn evaluate(
        &self,
        x: &[f64],
        counter: &mut EvalCounter,
    ) -> Result<EvaluatedIndividual, ProblemError> {
        if x.len() != self.variables.len() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.variables.len(),
                actual: x.len(),
            });
        }
        counter.bump();

        let f = (self.objective)(x);
        if !f.is_finite() {
            return Err(ProblemError::NonFiniteValue {
                source_name: "objective".into(),
                value: f,
            });
        }
        let mut raw = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let value = (c.evaluator)(x);
            if !value.is_finite() {
                return Err(ProblemError::NonFiniteValue {
                    source_name: format!("constraint `{}`", c.name),
                    value,
                });
            }
            raw.push(value);
        }

        let mut g = Vec::with_capacity(self.normalized.len());
        let mut equality_residuals = Vec::new();
        for (i, nc) in self.normalized.iter().enumerate() {
            let value = raw[nc.source];
            if nc.is_equality() {
                equality_residuals.push((i, value.abs()));
            }
            g.push(nc.apply(value));
        }
        let cv = constraint_violation(&g);
        let nv = violation_count(&g)?;
        Ok(EvaluatedIndividual {
            x: x.to_vec(),
            f,
            feasible: cv == 0.0,
            g,
            cv,
            nv,
            equality_residuals,
        })
    }

    /// Like [`Problem::evaluate`], but a non-finite objective or constraint
    /// yields [`EvaluatedIndividual::non_finite`] instead of an error.
    pub fn evaluate_or_worst(&self, x: Vec<f64>, counter: &mut EvalCounter) -> EvaluatedIndividual {
        match self.evaluate(&x, counter) {
            Ok(ind) => ind,
            Err(_) => EvaluatedIndividual::non_finite(x, self.normalized.len()),
        }
    }
}
