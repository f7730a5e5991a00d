//! Executable checks of the hypotheses and inequalities behind convergence of
//! the averaged iterates:
//!
//! * transportation: `<v - u, y - x> >= -(sqrt ε1 + sqrt ε2)^2` for
//!   `(x, u) ∈ T^ε1`, `(y, v) ∈ T^ε2`;
//! * boundedness of `(ε_n u_n)`;
//! * the quasi-Fejér inequality `||x_{n+1} - x||^2 <= ||x_n - x||^2 + λ_n^{4/3} (4M^2 + 12)`;
//! * analytic membership tests for the solution-set qualification, where known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::probes::geomspace;
use crate::oracles::{
    check_eps_enlargement, check_eps_subgradient, check_eps_subgradient_tol, ConvexFunctionOracle, ConvexSet,
    SampledOperator, Subdifferential,
};
use crate::point::Point;
use crate::problems::BuiltinProblem;
use crate::splitting::ProblemSpec;
use crate::trace::ConvergenceTrace;

/// Slack for the transportation inequality.
pub const TRANSPORT_TOL: f64 = 1e-12;
/// Slack for the quasi-Fejér inequality.
pub const FEJER_TOL: f64 = 1e-9;
/// Relative increase of the late `eps_n ||u_n||` supremum over the early one
/// that counts as growth.
pub const H1_GROWTH_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Status {
    Verified,
    Refuted,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportationCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Either point failed its enlargement membership test, so the
    /// inequality is not implied.
    pub vacuous: bool,
}

pub fn check_transportation(
    op: &SampledOperator,
    p1: (&Point, &Point),
    eps1: f64,
    p2: (&Point, &Point),
    eps2: f64,
) -> Result<TransportationCheck> {
    let (x, u) = p1;
    let (y, v) = p2;
    x.check_dim(y)?;
    let member1 = check_eps_enlargement(op, x, u, eps1)?;
    let member2 = check_eps_enlargement(op, y, v, eps2)?;
    let lhs = v.sub(u).dot(&y.sub(x));
    let rhs = -(eps1.sqrt() + eps2.sqrt()).powi(2);
    Ok(TransportationCheck {
        holds: lhs >= rhs - TRANSPORT_TOL,
        lhs,
        rhs,
        vacuous: !(member1 && member2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H1Trend {
    Plateau,
    Growth,
    /// Fewer than four rows.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub sup: f64,
    pub first_quartile_sup: f64,
    pub last_quartile_sup: f64,
    pub trend: H1Trend,
    pub bound: Option<f64>,
    pub violated: bool,
}

/// Observed supremum of `eps_n ||u_n||` and whether it keeps growing.
pub fn check_h1(trace: &ConvergenceTrace, bound: Option<f64>) -> H1Report {
    let values: Vec<f64> = trace.rows.iter().map(|r| r.eps_u_norm).collect();
    let sup = values.iter().copied().fold(trace.h1_sup, f64::max);
    let quarter = values.len() / 4;
    let (first, last, trend) = if quarter == 0 {
        (sup, sup, H1Trend::Insufficient)
    } else {
        let first = values[..quarter].iter().copied().fold(0.0, f64::max);
        let last = values[values.len() - quarter..].iter().copied().fold(0.0, f64::max);
        let trend = if last > first * (1.0 + H1_GROWTH_RATIO) + 1e-12 {
            H1Trend::Growth
        } else {
            H1Trend::Plateau
        };
        (first, last, trend)
    };
    H1Report {
        sup,
        first_quartile_sup: first,
        last_quartile_sup: last,
        trend,
        bound,
        violated: bound.is_some_and(|b| sup > b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FejerReport {
    pub violations: usize,
    /// Largest `lhs - rhs` over the checked pairs (negative when all hold with room).
    pub worst_margin: f64,
    pub pairs: usize,
    pub m: f64,
}

/// Checks `||x_{n+1} - x*||^2 <= ||x_n - x*||^2 + λ_n^{4/3} (4M^2 + 12)` on every
/// consecutive pair of a full-resolution trace, including the final state.
pub fn check_fejer(trace: &ConvergenceTrace, x_star: &Point, m: f64) -> Result<FejerReport> {
    if !trace.is_full_resolution() {
        return Err(Error::InsufficientResolution {
            record_every: trace.header.record_every.max(2),
        });
    }
    let first = trace.rows.first().ok_or(Error::Empty("trace rows"))?;
    first.x.check_dim(x_star)?;

    let slack = 4.0 * m * m + 12.0;
    let mut pairs: Vec<(&Point, &Point, f64)> = trace
        .rows
        .windows(2)
        .map(|w| (&w[0].x, &w[1].x, w[0].lambda))
        .collect();
    if let (Some(last), Some(fin)) = (trace.rows.last(), trace.final_state.as_ref()) {
        if fin.n == last.n + 1 {
            pairs.push((&last.x, &fin.x, last.lambda));
        }
    }

    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for (x, x_next, lambda) in &pairs {
        let lhs = x_next.sub(x_star).norm_sq();
        let rhs = x.sub(x_star).norm_sq() + lambda.powf(4.0 / 3.0) * slack;
        let margin = lhs - rhs;
        worst = worst.max(margin);
        if margin > FEJER_TOL {
            violations += 1;
        }
    }
    Ok(FejerReport {
        violations,
        worst_margin: worst,
        pairs: pairs.len(),
        m,
    })
}

/// For `f = -sqrt` and `C = {0}` at `x = 0`: checks that `u = -1/(4ε)` lies in
/// `∂_ε f(0) ∩ (1/(4ε)) B` and `-u = 1/(4ε)` lies in `∂_ε δ_C(0)`, so that
/// `0 = -u + u` belongs to the truncated sum.
pub fn check_h2_example(eps: f64) -> bool {
    if !(eps.is_finite() && eps > 0.0) {
        return false;
    }
    let zero = Point::scalar(0.0);
    let radius = 1.0 / (4.0 * eps);
    let u = Point::scalar(-radius);
    let w = Point::scalar(radius);

    // The supporting line of slope u touches -sqrt at y = 4 eps^2.
    let touch = 4.0 * eps * eps;
    let mut probes = geomspace(touch * 1e-4, touch * 1e4, 801);
    probes.push(zero.clone());
    probes.push(Point::scalar(touch));
    let in_f = check_eps_subgradient(&ConvexFunctionOracle::NegSqrt, &zero, &u, eps, &probes).unwrap_or(false);
    let in_ball = u.norm() <= radius;

    let indicator = ConvexFunctionOracle::indicator(ConvexSet::singleton(zero.clone()));
    let in_indicator = check_eps_subgradient(&indicator, &zero, &w, eps, &probes).unwrap_or(false);

    in_f && in_ball && in_indicator && u.add(&w).norm() == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2PrimeWitness {
    pub x: Point,
    /// `v ∈ ∂f_A(x)` with `-v ∈ ∂f_B(x)`.
    pub v: Point,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct H2PrimeReport {
    pub verified_points: Vec<H2PrimeWitness>,
    pub unverified_points: Vec<Point>,
}

/// For each candidate `x`, looks for `v ∈ ∂f_A(x) ∩ (-∂f_B(x))` from the closed-form
/// subdifferentials and confirms both memberships by brute force at `ε = 0`.
pub fn check_h2prime(problem: &ProblemSpec, candidates: &[Point], probes: &[Point]) -> Result<H2PrimeReport> {
    let mut report = H2PrimeReport::default();
    for x in candidates {
        match h2prime_witness(problem, x, probes)? {
            Some(v) => report.verified_points.push(H2PrimeWitness { x: x.clone(), v }),
            None => report.unverified_points.push(x.clone()),
        }
    }
    Ok(report)
}

fn h2prime_witness(problem: &ProblemSpec, x: &Point, probes: &[Point]) -> Result<Option<Point>> {
    if !(problem.a.in_domain(x) && problem.b.in_domain(x)) {
        problem.a.check_dim(x)?;
        return Ok(None);
    }
    let sa = problem.a.subdifferential(x)?;
    let sb = negate(problem.b.subdifferential(x)?);
    let Some(v) = intersect_point(&sa, &sb, x.dim())? else {
        return Ok(None);
    };
    let tol = 1e-9;
    let ok = check_eps_subgradient_tol(&problem.a, x, &v, 0.0, probes, tol)?
        && check_eps_subgradient_tol(&problem.b, x, &v.scale(-1.0), 0.0, probes, tol)?;
    Ok(ok.then_some(v))
}

fn negate(s: Subdifferential) -> Subdifferential {
    match s {
        Subdifferential::Empty => Subdifferential::Empty,
        Subdifferential::Intervals(iv) => Subdifferential::Intervals(iv.into_iter().map(|(l, h)| (-h, -l)).collect()),
        Subdifferential::Ray(d) => Subdifferential::Ray(d.scale(-1.0)),
    }
}

fn intersect_point(a: &Subdifferential, b: &Subdifferential, dim: usize) -> Result<Option<Point>> {
    use Subdifferential::*;
    Ok(match (a, b) {
        (Empty, _) | (_, Empty) => None,
        (Intervals(ia), Intervals(ib)) => {
            let mut v = Vec::with_capacity(dim);
            for (&(la, ha), &(lb, hb)) in ia.iter().zip(ib) {
                let (lo, hi) = (la.max(lb), ha.min(hb));
                if lo > hi {
                    return Ok(None);
                }
                v.push(0.0f64.clamp(lo, hi));
            }
            Some(Point::new(v)?)
        }
        (Ray(d), Intervals(iv)) | (Intervals(iv), Ray(d)) => ray_in_box(d, iv),
        (Ray(_), Ray(_)) => Some(Point::zeros(dim)),
    })
}

/// Smallest `t >= 0` with `t d` inside the box, as the point `t d`.
fn ray_in_box(d: &Point, iv: &[(f64, f64)]) -> Option<Point> {
    let (mut t_lo, mut t_hi) = (0.0f64, f64::INFINITY);
    for (&di, &(l, h)) in d.coords().iter().zip(iv) {
        if di == 0.0 {
            if l > 0.0 || h < 0.0 {
                return None;
            }
        } else {
            let (a, b) = if di > 0.0 { (l / di, h / di) } else { (h / di, l / di) };
            t_lo = t_lo.max(a);
            t_hi = t_hi.min(b);
        }
    }
    (t_lo <= t_hi).then(|| d.scale(t_lo))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: H1Report,
    pub h2_analytic: H2Status,
    pub fejer: Option<FejerReport>,
    pub passed: bool,
}

/// Runs every applicable check on a trace. With a builtin problem, the bound
/// hint, H2 metadata and known solution are used; the Fejér check needs a
/// full-resolution trace and is skipped otherwise.
pub fn diagnose(trace: &ConvergenceTrace, problem: Option<&BuiltinProblem>) -> HypothesisReport {
    let bound = problem.map(|p| p.notes.h1_bound);
    let h1 = check_h1(trace, bound);

    let h2_analytic = match problem {
        Some(p) if p.notes.h2prime == H2Status::Verified => H2Status::Verified,
        Some(p) if p.id == "paper-example" => {
            if trace.rows.iter().filter(|r| r.eps > 0.0).all(|r| check_h2_example(r.eps)) {
                H2Status::Verified
            } else {
                H2Status::Refuted
            }
        }
        Some(p) => p.notes.h2,
        None => H2Status::Unknown,
    };

    let fejer = problem.and_then(|p| {
        let m = h1.sup.max(p.notes.h1_bound);
        check_fejer(trace, &p.solution, m).ok()
    });

    let passed = !h1.violated
        && h1.trend != H1Trend::Growth
        && h2_analytic != H2Status::Refuted
        && fejer.is_none_or(|f| f.violations == 0);
    HypothesisReport {
        h1,
        h2_analytic,
        fejer,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::probes::linspace;
    use crate::trace::TraceRow;

    fn identity() -> SampledOperator {
        SampledOperator::from_map(linspace(-10.0, 10.0, 2001), |t| t.clone()).unwrap()
    }

    fn p(v: f64) -> Point {
        Point::scalar(v)
    }

    #[test]
    fn transportation_tight_case() {
        let c = check_transportation(&identity(), (&p(0.0), &p(2.0)), 1.0, (&p(2.0), &p(0.0)), 1.0).unwrap();
        assert_eq!(c.lhs, -4.0);
        assert_eq!(c.rhs, -4.0);
        assert!(c.holds && !c.vacuous);
    }

    #[test]
    fn transportation_exact_points() {
        let c = check_transportation(&identity(), (&p(1.0), &p(1.0)), 0.0, (&p(-3.0), &p(-3.0)), 0.0).unwrap();
        assert!(c.holds && c.lhs >= 0.0 && c.rhs == 0.0);
        let c = check_transportation(&identity(), (&p(0.0), &p(1.0)), 1.0, (&p(0.0), &p(-1.0)), 1.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, -4.0));
        assert!(c.holds);
    }

    #[test]
    fn transportation_flags_vacuous_pairs() {
        let c = check_transportation(&identity(), (&p(0.0), &p(5.0)), 1.0, (&p(2.0), &p(0.0)), 1.0).unwrap();
        assert!(c.vacuous);
    }

    fn synthetic(values: impl Fn(usize) -> f64, count: usize) -> ConvergenceTrace {
        let rows = (1..=count)
            .map(|n| TraceRow {
                n,
                lambda: 1.0 / n as f64,
                eps: 1.0,
                x: p(0.0),
                xbar: p(0.0),
                eps_u_norm: values(n),
                dist_to_solution: None,
            })
            .collect();
        ConvergenceTrace::from_rows(rows)
    }

    #[test]
    fn h1_growth_detected() {
        let r = check_h1(&synthetic(|n| (n as f64).ln(), 1000), None);
        assert_eq!(r.trend, H1Trend::Growth);
        let r = check_h1(&synthetic(|_| 0.25, 1000), Some(0.2));
        assert_eq!(r.trend, H1Trend::Plateau);
        assert!(r.violated);
        assert_eq!(check_h1(&synthetic(|_| 1.0, 2), None).trend, H1Trend::Insufficient);
    }

    #[test]
    fn fejer_detects_teleport() {
        let mut t = synthetic(|_| 0.0, 20);
        t.rows[10].x = p(1e3);
        let r = check_fejer(&t, &p(0.0), 0.25).unwrap();
        assert_eq!(r.violations, 1);
        assert!(r.worst_margin > 1e5);
    }

    #[test]
    fn fejer_requires_full_resolution() {
        let rows = synthetic(|_| 0.0, 20).rows.into_iter().step_by(2).collect();
        let t = ConvergenceTrace::from_rows(rows);
        assert!(matches!(
            check_fejer(&t, &p(0.0), 1.0),
            Err(Error::InsufficientResolution { record_every: 2 })
        ));
    }

    #[test]
    fn h2_example_memberships() {
        for eps in [0.5, 0.001, 10.0] {
            assert!(check_h2_example(eps), "eps = {eps}");
        }
        assert!(!check_h2_example(0.0));
    }

    #[test]
    fn h2_probe_grid_rejects_wrong_slope() {
        // -0.9/(4 eps) lies outside the eps-subdifferential at 0.
        let eps: f64 = 0.3;
        let u = p(-0.9 / (4.0 * eps));
        let touch = 4.0 * eps * eps;
        let probes = geomspace(touch * 1e-4, touch * 1e4, 801);
        assert!(!check_eps_subgradient(&ConvexFunctionOracle::NegSqrt, &p(0.0), &u, eps, &probes).unwrap());
    }

    #[test]
    fn ray_box_intersection() {
        assert_eq!(ray_in_box(&p(1.0), &[(1.0, 1.0)]), Some(p(1.0)));
        assert_eq!(ray_in_box(&p(1.0), &[(-2.0, -1.0)]), None);
        assert_eq!(ray_in_box(&p(-2.0), &[(-3.0, f64::INFINITY)]), Some(p(0.0)));
    }
}
