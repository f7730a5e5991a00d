//! Brute-force membership tests over finite probe sets.
//!
//! The defining inequalities quantify over the whole space, so every check
//! here is a necessary condition only: `false` certifies a violation, `true`
//! means no violation was found among the probes.

use super::function::ConvexFunctionOracle;
use crate::error::{Error, Result};
use crate::point::Point;

/// Default relative slack for inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// A finite sample `{(x_i, v_i)}` of the graph of a set-valued operator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledOperator {
    graph: Vec<(Point, Point)>,
}

impl SampledOperator {
    pub fn new(graph: Vec<(Point, Point)>) -> Result<Self> {
        if let Some((x0, _)) = graph.first() {
            for (x, v) in &graph {
                x0.check_dim(x)?;
                x0.check_dim(v)?;
            }
        }
        Ok(SampledOperator { graph })
    }

    /// Samples a single-valued map at the given points.
    pub fn from_map(points: impl IntoIterator<Item = Point>, f: impl Fn(&Point) -> Point) -> Result<Self> {
        SampledOperator::new(points.into_iter().map(|x| { let v = f(&x); (x, v) }).collect())
    }

    pub fn graph(&self) -> &[(Point, Point)] {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }
}

/// Tests `f(x) + <u, y - x> <= f(y) + eps` at every probe `y`.
pub fn check_eps_subgradient(
    oracle: &ConvexFunctionOracle,
    x: &Point,
    u: &Point,
    eps: f64,
    probes: &[Point],
) -> Result<bool> {
    check_eps_subgradient_tol(oracle, x, u, eps, probes, INEQUALITY_TOL)
}

pub fn check_eps_subgradient_tol(
    oracle: &ConvexFunctionOracle,
    x: &Point,
    u: &Point,
    eps: f64,
    probes: &[Point],
    tol: f64,
) -> Result<bool> {
    oracle.require_domain(x)?;
    x.check_dim(u)?;
    if probes.is_empty() {
        return Err(Error::Empty("probes"));
    }
    let fx = oracle.eval(x)?;
    for y in probes {
        x.check_dim(y)?;
        let fy = oracle.eval(y)?;
        if fy == f64::INFINITY {
            continue;
        }
        let inner = u.dot(&y.sub(x));
        let lhs = fx + inner;
        let rhs = fy + eps;
        if lhs > rhs + tol * (1.0 + fx.abs() + fy.abs() + inner.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tests `<v - u, y - x> >= -eps` for every sampled `(y, v)`.
pub fn check_eps_enlargement(op: &SampledOperator, x: &Point, u: &Point, eps: f64) -> Result<bool> {
    x.check_dim(u)?;
    if op.is_empty() {
        return Err(Error::Empty("operator graph"));
    }
    for (y, v) in op.graph() {
        x.check_dim(y)?;
        let a = v.sub(u);
        let b = y.sub(x);
        let lhs = a.dot(&b);
        if lhs < -eps - INEQUALITY_TOL * (1.0 + a.norm() * b.norm()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tests `<v - u, y - x> >= 0` over all pairs of graph samples.
pub fn check_monotone_graph(op: &SampledOperator) -> bool {
    let g = op.graph();
    for (i, (x, u)) in g.iter().enumerate() {
        for (y, v) in &g[i + 1..] {
            let a = v.sub(u);
            let b = y.sub(x);
            if a.dot(&b) < -INEQUALITY_TOL * (1.0 + a.norm() * b.norm()) {
                return false;
            }
        }
    }
    true
}
