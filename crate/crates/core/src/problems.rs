//! Builtin problems `min f(x) subject to x ∈ C`, with `A = ∂δ_C` and `B = ∂f`,
//! each with an analytically known minimizer.

use serde::Serialize;

use crate::diagnostics::H2Status;
use crate::error::{Error, Result};
use crate::oracles::probes::lattice;
use crate::oracles::{ConvexFunctionOracle, ConvexSet};
use crate::point::Point;
use crate::splitting::ProblemSpec;

pub const BUILTIN_IDS: [&str; 4] = ["paper-example", "quad-halfspace", "abs-box", "quad-box-2d"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemNotes {
    /// Upper bound on `sup eps_n ||u_n||` for any selection strategy under
    /// schedules with `eps_n <= 1`.
    pub h1_bound: f64,
    pub h2: H2Status,
    pub h2prime: H2Status,
    pub passty_applicable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinProblem {
    pub id: &'static str,
    pub description: &'static str,
    pub spec: ProblemSpec,
    pub solution: Point,
    pub notes: ProblemNotes,
}

/// Result of a brute-force search for the minimum of `f + δ_C` on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    pub solution_feasible: bool,
    pub solution_value: f64,
    pub grid_min: f64,
    pub grid_argmin: Point,
}

impl GridCheck {
    pub fn confirms(&self, tol: f64) -> bool {
        self.solution_feasible && self.solution_value <= self.grid_min + tol
    }
}

impl BuiltinProblem {
    pub fn objective(&self) -> &ConvexFunctionOracle {
        &self.spec.b
    }

    pub fn constraint(&self) -> Option<&ConvexSet> {
        match &self.spec.a {
            ConvexFunctionOracle::Indicator(c) => Some(c),
            _ => None,
        }
    }

    fn penalized(&self, x: &Point) -> Result<f64> {
        Ok(self.spec.a.eval(x)? + self.spec.b.eval(x)?)
    }

    /// Compares the registered solution against the best point of a lattice
    /// of `per_axis` points per axis on `solution ± radius`.
    pub fn grid_check(&self, per_axis: usize, radius: f64) -> Result<GridCheck> {
        let lo: Vec<f64> = self.solution.coords().iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = self.solution.coords().iter().map(|c| c + radius).collect();
        let mut best: Option<(f64, Point)> = None;
        for p in lattice(&lo, &hi, per_axis) {
            let v = self.penalized(&p)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, p));
            }
        }
        let (grid_min, grid_argmin) = best.ok_or(Error::Empty("grid"))?;
        let solution_value = self.penalized(&self.solution)?;
        Ok(GridCheck {
            solution_feasible: solution_value.is_finite(),
            solution_value,
            grid_min,
            grid_argmin,
        })
    }
}

/// Looks up a builtin problem by its stable id.
pub fn builtin(id: &str) -> Result<BuiltinProblem> {
    match id {
        "paper-example" => paper_example(),
        "quad-halfspace" => quad_halfspace(),
        "abs-box" => abs_box(),
        "quad-box-2d" => quad_box_2d(),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

pub fn builtins() -> Vec<BuiltinProblem> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin(id).expect("registered id"))
        .collect()
}

/// `f(t) = -sqrt(t)` over `C = {0}`. No qualification condition holds:
/// `∂f(0)` is empty, so `∂δ_C + ∂f` has no zero, yet `0` minimizes `f` over `C`.
fn paper_example() -> Result<BuiltinProblem> {
    let zero = Point::scalar(0.0);
    let spec = ProblemSpec::new(
        ConvexFunctionOracle::indicator(ConvexSet::singleton(zero.clone())),
        ConvexFunctionOracle::NegSqrt,
        Point::scalar(4.0),
    )?
    .with_solution_set(ConvexSet::singleton(zero.clone()))
    .with_domain_condition(true)
    .with_h2prime(false);
    // eps_0 = 1 at x_0 = 4 gives slopes up to (3 + sqrt 5)/8; at x = 0 selections
    // lie in [-1/(2 eps), -1/(4 eps)] for every strategy.
    let h1_bound = (3.0 + 5f64.sqrt()) / 8.0;
    Ok(BuiltinProblem {
        id: "paper-example",
        description: "f(t) = -sqrt(t) on t >= 0 over C = {0}; no qualification condition",
        spec: spec.with_h1_bound_hint(h1_bound),
        solution: zero,
        notes: ProblemNotes {
            h1_bound,
            h2: H2Status::Verified,
            h2prime: H2Status::Refuted,
            passty_applicable: false,
        },
    })
}

fn quad_halfspace() -> Result<BuiltinProblem> {
    let solution = Point::scalar(1.0);
    let h1_bound = 5.0 + 2f64.sqrt();
    let spec = ProblemSpec::new(
        ConvexFunctionOracle::indicator(ConvexSet::halfspace(Point::scalar(1.0), 1.0)?),
        ConvexFunctionOracle::quadratic(Point::scalar(2.0)),
        Point::scalar(-3.0),
    )?
    .with_solution_set(ConvexSet::singleton(solution.clone()))
    .with_domain_condition(true)
    .with_h2prime(true)
    .with_h1_bound_hint(h1_bound);
    Ok(BuiltinProblem {
        id: "quad-halfspace",
        description: "f(x) = (x - 2)^2 / 2 over C = (-inf, 1]",
        spec,
        solution,
        notes: ProblemNotes {
            h1_bound,
            h2: H2Status::Verified,
            h2prime: H2Status::Verified,
            passty_applicable: true,
        },
    })
}

fn abs_box() -> Result<BuiltinProblem> {
    let solution = Point::scalar(1.0);
    let spec = ProblemSpec::new(
        ConvexFunctionOracle::indicator(ConvexSet::interval(1.0, 2.0)?),
        ConvexFunctionOracle::Abs,
        Point::scalar(2.0),
    )?
    .with_solution_set(ConvexSet::singleton(solution.clone()))
    .with_domain_condition(true)
    .with_h2prime(true)
    .with_h1_bound_hint(1.0);
    Ok(BuiltinProblem {
        id: "abs-box",
        description: "f(x) = |x| over C = [1, 2]",
        spec,
        solution,
        notes: ProblemNotes {
            h1_bound: 1.0,
            h2: H2Status::Verified,
            h2prime: H2Status::Verified,
            passty_applicable: true,
        },
    })
}

fn quad_box_2d() -> Result<BuiltinProblem> {
    let solution = Point::new(vec![1.0, 1.0])?;
    let h1_bound = 13f64.sqrt() + 2f64.sqrt();
    let spec = ProblemSpec::new(
        ConvexFunctionOracle::indicator(ConvexSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0])?),
        ConvexFunctionOracle::quadratic(Point::new(vec![2.0, 3.0])?),
        Point::zeros(2),
    )?
    .with_solution_set(ConvexSet::singleton(solution.clone()))
    .with_domain_condition(true)
    .with_h2prime(true)
    .with_h1_bound_hint(h1_bound);
    Ok(BuiltinProblem {
        id: "quad-box-2d",
        description: "f(x) = ||x - (2, 3)||^2 / 2 over C = [0, 1]^2",
        spec,
        solution,
        notes: ProblemNotes {
            h1_bound,
            h2: H2Status::Verified,
            h2prime: H2Status::Verified,
            passty_applicable: true,
        },
    })
}
