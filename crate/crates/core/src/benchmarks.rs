//! Engineering design benchmarks and small analytic problems.
//!
//! Every entry carries the published reference design so its objective
//! value and feasibility can be re-checked by plugging it back in.

use std::f64::consts::PI;

use crate::problem::{ConstraintSpec, EvalCounter, Problem, VariableSpec};

/// Slack on the largest normalized constraint value when checking printed
/// reference designs, which are rounded to a handful of digits.
pub const REFERENCE_FEASIBILITY_TOL: f64 = 1e-5;

/// Names accepted by [`by_name`], engineering problems first.
pub const PROBLEM_NAMES: [&str; 7] = [
    "himmelblau",
    "spring",
    "pressure-vessel",
    "welded-beam",
    "toy-linear",
    "toy-equality",
    "toy-infeasible",
];

pub const ENGINEERING_NAMES: [&str; 4] = ["himmelblau", "spring", "pressure-vessel", "welded-beam"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub label: &'static str,
    pub x: Vec<f64>,
    pub f: f64,
    /// Allowed absolute deviation of the recomputed objective.
    pub tolerance: f64,
    /// `false` marks a design documented to violate a constraint.
    pub expect_feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCheck {
    pub label: &'static str,
    pub f: f64,
    pub expected_f: f64,
    pub tolerance: f64,
    pub max_g: f64,
    pub expect_feasible: bool,
    pub f_ok: bool,
    pub feasibility_ok: bool,
}

impl ReferenceCheck {
    pub fn passed(&self) -> bool {
        self.f_ok && self.feasibility_ok
    }
}

impl ReferencePoint {
    pub fn check(&self, problem: &Problem) -> ReferenceCheck {
        let ind = problem.evaluate_or_worst(self.x.clone(), &mut EvalCounter::new());
        let max_g = ind.max_violation();
        let feasibility_ok = if self.expect_feasible {
            max_g <= REFERENCE_FEASIBILITY_TOL
        } else {
            max_g > 0.0
        };
        ReferenceCheck {
            label: self.label,
            f: ind.f,
            expected_f: self.f,
            tolerance: self.tolerance,
            max_g,
            expect_feasible: self.expect_feasible,
            f_ok: (ind.f - self.f).abs() <= self.tolerance,
            feasibility_ok,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkEntry {
    pub problem: Problem,
    /// The headline design for this problem.
    pub reference: ReferencePoint,
    /// Further published designs worth re-checking.
    pub others: Vec<ReferencePoint>,
}

impl BenchmarkEntry {
    pub fn reference_x(&self) -> &[f64] {
        &self.reference.x
    }

    pub fn reference_f(&self) -> f64 {
        self.reference.f
    }

    pub fn reference_points(&self) -> impl Iterator<Item = &ReferencePoint> {
        std::iter::once(&self.reference).chain(&self.others)
    }

    pub fn verify(&self) -> Vec<ReferenceCheck> {
        self.reference_points()
            .map(|r| r.check(&self.problem))
            .collect()
    }
}

pub fn by_name(name: &str) -> Option<BenchmarkEntry> {
    match name {
        "himmelblau" => Some(himmelblau()),
        "spring" => Some(spring()),
        "pressure-vessel" => Some(pressure_vessel()),
        "welded-beam" => Some(welded_beam()),
        "toy-linear" => Some(toy_linear()),
        "toy-equality" => Some(toy_equality()),
        "toy-infeasible" => Some(toy_infeasible()),
        _ => None,
    }
}

pub fn himmelblau_g1(x: &[f64]) -> f64 {
    85.334407 + 0.0056858 * x[1] * x[4] + 0.0006262 * x[0] * x[3] - 0.0022053 * x[2] * x[4]
}

pub fn himmelblau_g2(x: &[f64]) -> f64 {
    80.51249 + 0.0071317 * x[1] * x[4] + 0.0029955 * x[0] * x[1] + 0.0021813 * x[2] * x[2]
}

pub fn himmelblau_g3(x: &[f64]) -> f64 {
    9.300961 + 0.0047026 * x[2] * x[4] + 0.0012547 * x[0] * x[2] + 0.0019085 * x[2] * x[3]
}

/// Himmelblau's nonlinear problem: five variables, three double-bounded
/// constraints (six inequalities after splitting).
pub fn himmelblau() -> BenchmarkEntry {
    let problem = Problem::builder("himmelblau")
        .variable(VariableSpec::continuous(78.0, 102.0))
        .variable(VariableSpec::continuous(33.0, 45.0))
        .variables([VariableSpec::continuous(27.0, 45.0); 3])
        .objective(|x| {
            5.3578547 * x[2] * x[2] + 0.8356891 * x[0] * x[4] + 37.293239 * x[0] - 40792.141
        })
        .constraint(ConstraintSpec::between("g1", 0.0, 92.0, himmelblau_g1))
        .constraint(ConstraintSpec::between("g2", 90.0, 110.0, himmelblau_g2))
        .constraint(ConstraintSpec::between("g3", 20.0, 25.0, himmelblau_g3))
        .build()
        .expect("himmelblau is well-formed");
    BenchmarkEntry {
        problem,
        // g1 evaluates to about 93.17 here, above its bound of 92
        reference: ReferencePoint {
            label: "headline (g1 > 92)",
            x: vec![78.0029, 33.080, 27.353, 44.61, 44.264],
            f: -30988.951,
            tolerance: 0.5,
            expect_feasible: false,
        },
        others: vec![ReferencePoint {
            label: "Deb (2000)",
            x: vec![78.0, 33.0, 29.995, 45.0, 36.776],
            f: -30665.5,
            tolerance: 1.0,
            expect_feasible: true,
        }],
    }
}

/// Tension/compression spring weight: wire diameter, coil diameter and
/// number of active coils.
pub fn spring() -> BenchmarkEntry {
    let problem = Problem::builder("spring")
        .variable(VariableSpec::continuous(0.05, 2.0))
        .variable(VariableSpec::continuous(0.25, 1.3))
        .variable(VariableSpec::continuous(2.0, 15.0))
        .objective(|x| (x[2] + 2.0) * x[0] * x[0] * x[1])
        .constraint(ConstraintSpec::less_equal("deflection", 1.0, |x| {
            1.0 - x[1].powi(3) * x[2] / (71785.0 * x[0].powi(4))
        }))
        .constraint(ConstraintSpec::less_equal("shear", 1.0, |x| {
            (4.0 * x[1] * x[1] - x[0] * x[1]) / (12566.0 * (x[0].powi(3) * x[1] - x[0].powi(4)))
                + 1.0 / (5108.0 * x[0] * x[0])
                - 1.0
        }))
        .constraint(ConstraintSpec::less_equal("surge", 1.0, |x| {
            1.0 - 140.45 * x[0] / (x[1] * x[1] * x[2])
        }))
        .constraint(ConstraintSpec::less_equal("diameter", 1.0, |x| {
            (x[0] + x[1]) / 1.5 - 1.0
        }))
        .build()
        .expect("spring is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "headline",
            x: vec![0.0513412, 0.3483225, 11.80261],
            f: 0.012672,
            tolerance: 1e-5,
            expect_feasible: true,
        },
        others: vec![ReferencePoint {
            label: "Coello (2000b)",
            x: vec![0.05148, 0.351661, 11.632201],
            f: 0.012704,
            tolerance: 1e-5,
            expect_feasible: true,
        }],
    }
}

/// Pressure vessel cost. Shell and head thickness come in 0.0625 in steps.
pub fn pressure_vessel() -> BenchmarkEntry {
    let thickness = VariableSpec::discrete(0.0625, 99.0 * 0.0625, 0.0625);
    let problem = Problem::builder("pressure-vessel")
        .variables([thickness, thickness])
        .variables([VariableSpec::continuous(10.0, 200.0); 2])
        .objective(|x| {
            0.6224 * x[0] * x[2] * x[3]
                + 1.7781 * x[1] * x[2] * x[2]
                + 3.1661 * x[0] * x[0] * x[3]
                + 19.84 * x[0] * x[0] * x[2]
        })
        .constraint(ConstraintSpec::less_equal("shell", 1.0, |x| {
            -x[0] + 0.0193 * x[2]
        }))
        .constraint(ConstraintSpec::less_equal("head", 1.0, |x| {
            -x[1] + 0.00954 * x[2]
        }))
        .constraint(ConstraintSpec::at_least("volume", 1_296_000.0, |x| {
            PI * x[2] * x[2] * x[3] + 4.0 / 3.0 * PI * x[2].powi(3)
        }))
        .constraint(ConstraintSpec::at_most("length", 240.0, |x| x[3]))
        .build()
        .expect("pressure vessel is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "headline",
            x: vec![0.8125, 0.4375, 42.0978, 176.644],
            f: 6059.79164,
            tolerance: 0.5,
            expect_feasible: true,
        },
        others: vec![ReferencePoint {
            label: "Yun (2005)",
            x: vec![1.125, 0.625, 58.2850, 43.725],
            f: 7198.424,
            tolerance: 1.0,
            expect_feasible: true,
        }],
    }
}

pub mod welded {
    //! Stress, deflection and buckling terms of the welded beam.

    pub const LOAD: f64 = 6000.0;
    pub const LENGTH: f64 = 14.0;
    pub const YOUNG: f64 = 30e6;
    pub const SHEAR_MODULUS: f64 = 12e6;
    pub const TAU_MAX: f64 = 13600.0;
    pub const SIGMA_MAX: f64 = 30000.0;
    pub const DELTA_MAX: f64 = 0.25;

    pub fn shear_stress(x: &[f64]) -> f64 {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let primary = LOAD / (2f64.sqrt() * x1 * x2);
        let moment = LOAD * (LENGTH + x2 / 2.0);
        let half = (x1 + x3) / 2.0;
        let radius = (x2 * x2 / 4.0 + half * half).sqrt();
        let polar = 2.0 * (2f64.sqrt() * x1 * x2 * (x2 * x2 / 12.0 + half * half));
        let secondary = moment * radius / polar;
        (primary * primary
            + 2.0 * primary * secondary * x2 / (2.0 * radius)
            + secondary * secondary)
            .sqrt()
    }

    pub fn bending_stress(x: &[f64]) -> f64 {
        6.0 * LOAD * LENGTH / (x[3] * x[2] * x[2])
    }

    pub fn deflection(x: &[f64]) -> f64 {
        4.0 * LOAD * LENGTH.powi(3) / (YOUNG * x[2].powi(3) * x[3])
    }

    pub fn buckling_load(x: &[f64]) -> f64 {
        let (x3, x4) = (x[2], x[3]);
        4.013 * YOUNG * (x3 * x3 * x4.powi(6) / 36.0).sqrt() / (LENGTH * LENGTH)
            * (1.0 - x3 / (2.0 * LENGTH) * (YOUNG / (4.0 * SHEAR_MODULUS)).sqrt())
    }
}

/// Welded beam fabrication cost with shear, bending, deflection and
/// buckling limits.
pub fn welded_beam() -> BenchmarkEntry {
    use welded::*;
    let problem = Problem::builder("welded-beam")
        .variable(VariableSpec::continuous(0.1, 2.0))
        .variable(VariableSpec::continuous(0.1, 10.0))
        .variable(VariableSpec::continuous(0.1, 10.0))
        .variable(VariableSpec::continuous(0.1, 2.0))
        .objective(|x| 1.1047 * x[0] * x[0] * x[1] + 0.04811 * x[2] * x[3] * (14.0 + x[1]))
        .constraint(ConstraintSpec::at_most("shear", TAU_MAX, shear_stress))
        .constraint(ConstraintSpec::at_most(
            "bending",
            SIGMA_MAX,
            bending_stress,
        ))
        .constraint(ConstraintSpec::at_most("x1-x4", 0.0, |x| x[0] - x[3]))
        .constraint(ConstraintSpec::at_least("x1", 0.125, |x| x[0]))
        .constraint(ConstraintSpec::at_most("deflection", DELTA_MAX, deflection))
        .constraint(ConstraintSpec::at_least("buckling", LOAD, buckling_load))
        .constraint(ConstraintSpec::at_most("cost", 5.0, |x| {
            0.10471 * x[0] * x[0] + 0.04811 * x[2] * x[3] * (14.0 + x[1])
        }))
        .build()
        .expect("welded beam is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "headline",
            x: vec![0.20578, 3.47294, 9.02922, 0.20608],
            f: 1.726718,
            tolerance: 1e-3,
            expect_feasible: true,
        },
        others: vec![ReferencePoint {
            label: "Siddall (1972)",
            x: vec![0.2444, 6.2189, 8.2915, 0.2444],
            f: 2.3815433,
            tolerance: 1e-3,
            expect_feasible: true,
        }],
    }
}

/// min x1 + x2 s.t. x1 + x2 >= 1 on the unit square; optimum 1 on the line.
pub fn toy_linear() -> BenchmarkEntry {
    let problem = Problem::builder("toy-linear")
        .variables([VariableSpec::continuous(0.0, 1.0); 2])
        .objective(|x| x[0] + x[1])
        .constraint(ConstraintSpec::less_equal("sum", 1.0, |x| {
            1.0 - x[0] - x[1]
        }))
        .build()
        .expect("toy-linear is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "analytic",
            x: vec![0.5, 0.5],
            f: 1.0,
            tolerance: 1e-12,
            expect_feasible: true,
        },
        others: vec![],
    }
}

/// min x1^2 + x2^2 s.t. x1 + x2 = 1; optimum 0.5 at (0.5, 0.5).
pub fn toy_equality() -> BenchmarkEntry {
    let problem = Problem::builder("toy-equality")
        .variables([VariableSpec::continuous(0.0, 1.0); 2])
        .objective(|x| x[0] * x[0] + x[1] * x[1])
        .constraint(ConstraintSpec::equality("sum", |x| x[0] + x[1] - 1.0))
        .build()
        .expect("toy-equality is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "analytic",
            x: vec![0.5, 0.5],
            f: 0.5,
            tolerance: 1e-12,
            expect_feasible: true,
        },
        others: vec![],
    }
}

/// x1 >= 2 on the unit square: nothing is feasible. The least violating
/// designs have x1 = 1.
pub fn toy_infeasible() -> BenchmarkEntry {
    let problem = Problem::builder("toy-infeasible")
        .variables([VariableSpec::continuous(0.0, 1.0); 2])
        .objective(|x| x[0] + x[1])
        .constraint(ConstraintSpec::at_least("x1", 2.0, |x| x[0]))
        .build()
        .expect("toy-infeasible is well-formed");
    BenchmarkEntry {
        problem,
        reference: ReferencePoint {
            label: "least violation",
            x: vec![1.0, 0.0],
            f: 1.0,
            tolerance: 1e-12,
            expect_feasible: false,
        },
        others: vec![],
    }
}

pub fn toy_problems() -> Vec<BenchmarkEntry> {
    vec![toy_linear(), toy_equality(), toy_infeasible()]
}
