//! The extended forward-backward iteration
//!
//! ```text
//! x_{n+1} = (I + λ_n A)^{-1} (x_n - λ_n u_n),   u_n ∈ ∂_{ε_n} f_B(x_n),
//! ```
//!
//! its projected epsilon-subgradient specialization (`A` the normal cone of a
//! set, so the resolvent is a projection), and the classical forward-backward
//! baseline with exact subgradients.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracles::{eps_subgradient, ConvexFunctionOracle, ConvexSet, SelectionStrategy};
use crate::point::Point;
use crate::schedule::{schedule_at, validate_passty_schedule, validate_schedule, StepSchedule};
use crate::state::{average_update, IterationState};
use crate::trace::{Algorithm, ConvergenceTrace, RunFailure, TraceHeader, TraceRow};

/// Stopping and recording parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub schedule: StepSchedule,
    pub strategy: SelectionStrategy,
    pub max_iter: usize,
    /// Row `n` is recorded when `n % record_every == 0`.
    pub record_every: usize,
    /// Run even when the schedule fails validation; recorded in the trace header.
    pub unsafe_schedule: bool,
    /// Stop once `dist(xbar_n, S) < tol`, for problems with a known solution set.
    pub early_stop_tol: Option<f64>,
}

impl AlgorithmConfig {
    pub fn new(schedule: StepSchedule, strategy: SelectionStrategy, max_iter: usize) -> Self {
        AlgorithmConfig {
            schedule,
            strategy,
            max_iter,
            record_every: 1,
            unsafe_schedule: false,
            early_stop_tol: None,
        }
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    pub fn with_unsafe_schedule(mut self, unsafe_schedule: bool) -> Self {
        self.unsafe_schedule = unsafe_schedule;
        self
    }

    pub fn with_early_stop(mut self, tol: f64) -> Self {
        self.early_stop_tol = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        if let Some(len) = self.schedule.len() {
            // Indices 0..=max_iter are read, index 0 sharing the first entry.
            if len < self.max_iter {
                return Err(Error::invalid(
                    "max_iter",
                    format!("explicit schedule has {len} entries, run needs {}", self.max_iter),
                ));
            }
        }
        if let Some(tol) = self.early_stop_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::invalid("early_stop_tol", "must be finite and positive"));
            }
        }
        Ok(())
    }
}

/// The pair `(A, B)` with starting point and what is known about the solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Backward operator, accessed through its resolvent.
    pub a: ConvexFunctionOracle,
    /// Forward operator, accessed through epsilon-subgradient selections.
    pub b: ConvexFunctionOracle,
    pub x0: Point,
    pub solution_set: Option<ConvexSet>,
    /// `S = (A + B)^{-1}(0)` is known to hold.
    pub h2prime: bool,
    /// Expected bound on `sup eps_n ||u_n||`.
    pub h1_bound_hint: Option<f64>,
    /// The author declares `D(A) ⊂ ∩_{ε>0} D(B^ε)`.
    pub domain_condition: bool,
}

impl ProblemSpec {
    pub fn new(a: ConvexFunctionOracle, b: ConvexFunctionOracle, x0: Point) -> Result<Self> {
        if !a.has_resolvent() {
            return Err(Error::UnsupportedResolvent(a.name()));
        }
        a.check_dim(&x0)?;
        b.require_domain(&x0)?;
        Ok(ProblemSpec {
            a,
            b,
            x0,
            solution_set: None,
            h2prime: false,
            h1_bound_hint: None,
            domain_condition: false,
        })
    }

    pub fn with_solution_set(mut self, set: ConvexSet) -> Self {
        self.solution_set = Some(set);
        self
    }

    pub fn with_h2prime(mut self, h2prime: bool) -> Self {
        self.h2prime = h2prime;
        self
    }

    pub fn with_h1_bound_hint(mut self, bound: f64) -> Self {
        self.h1_bound_hint = Some(bound);
        self
    }

    pub fn with_domain_condition(mut self, holds: bool) -> Self {
        self.domain_condition = holds;
        self
    }

    pub fn dist_to_solution(&self, x: &Point) -> Option<f64> {
        self.solution_set.as_ref().and_then(|s| s.distance(x).ok())
    }
}

/// One step of the iteration from `state.x` with parameters `(lambda, eps)`.
///
/// The new iterate enters the running average with weight `weight`, which is
/// `lambda_{n+1}` when the average is `sum lambda_k x_k / sigma_n`.
/// Returns the new state together with the selection `u_n` taken at `state.x`.
pub fn efb_step(
    problem: &ProblemSpec,
    state: &IterationState,
    lambda: f64,
    eps: f64,
    weight: f64,
    strategy: SelectionStrategy,
) -> Result<(IterationState, Point)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be finite and positive, got {eps}")));
    }
    step(problem, state, lambda, eps, weight, strategy)
}

fn step(
    problem: &ProblemSpec,
    state: &IterationState,
    lambda: f64,
    eps: f64,
    weight: f64,
    strategy: SelectionStrategy,
) -> Result<(IterationState, Point)> {
    let u = eps_subgradient(&problem.b, &state.x, eps, strategy)?;
    let x_next = forward_backward(problem, &state.x, &u, lambda)?;
    let mut next = average_update(state, x_next, weight)?;
    next.last_u = Some(u.clone());
    Ok((next, u))
}

fn forward_backward(problem: &ProblemSpec, x: &Point, u: &Point, lambda: f64) -> Result<Point> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("must be finite and positive, got {lambda}")));
    }
    problem.a.resolvent(lambda, &x.axpy(-lambda, u))
}

/// Runs the extended forward-backward iteration for `config.max_iter` steps.
///
/// Precondition failures (bad config, rejected schedule) are returned as
/// errors. Oracle failures during the run stop it and are annotated on the
/// returned partial trace.
pub fn run_efb(problem: &ProblemSpec, config: &AlgorithmConfig) -> Result<ConvergenceTrace> {
    run(problem, config, Algorithm::Efb)
}

/// `x_{n+1} = P_C(x_n - λ_n u_n)` with `u_n ∈ ∂_{ε_n} f(x_n)`; requires `A` to be an indicator.
pub fn run_projected_eps_subgradient(problem: &ProblemSpec, config: &AlgorithmConfig) -> Result<ConvergenceTrace> {
    if !matches!(problem.a, ConvexFunctionOracle::Indicator(_)) {
        return Err(Error::SpecializationMismatch(format!(
            "projected epsilon-subgradient needs A = indicator(C), got {}",
            problem.a
        )));
    }
    let mut trace = run_efb(problem, config)?;
    trace.header.algorithm = Some(Algorithm::ProjectedEpsSubgrad);
    Ok(trace)
}

/// Classical forward-backward: exact subgradients (`eps = 0`) and
/// `sum lambda_n = inf`, `sum lambda_n^2 < inf`.
pub fn run_passty_fb(problem: &ProblemSpec, config: &AlgorithmConfig) -> Result<ConvergenceTrace> {
    run(problem, config, Algorithm::Passty)
}

pub fn run_algorithm(problem: &ProblemSpec, config: &AlgorithmConfig, algorithm: Algorithm) -> Result<ConvergenceTrace> {
    match algorithm {
        Algorithm::Efb => run_efb(problem, config),
        Algorithm::ProjectedEpsSubgrad => run_projected_eps_subgradient(problem, config),
        Algorithm::Passty => run_passty_fb(problem, config),
    }
}

fn run(problem: &ProblemSpec, config: &AlgorithmConfig, algorithm: Algorithm) -> Result<ConvergenceTrace> {
    config.validate()?;
    let exact = algorithm == Algorithm::Passty;
    let validity = if exact {
        validate_passty_schedule(&config.schedule)?
    } else {
        validate_schedule(&config.schedule)?
    };
    if !validity.valid && !config.unsafe_schedule {
        return Err(Error::InvalidSchedule {
            reasons: validity.reasons,
        });
    }

    let mut seeds = match config.strategy {
        SelectionStrategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut state = IterationState::new(problem.x0.clone());
    let mut rows = Vec::with_capacity(config.max_iter.div_ceil(config.record_every));
    let mut h1_sup = 0.0f64;
    let mut failure = None;
    let mut stopped_early = false;

    for n in 0..config.max_iter {
        let (lambda, eps) = schedule_at(&config.schedule, n)?;
        let eps = if exact { 0.0 } else { eps };
        let strategy = match seeds.as_mut() {
            Some(rng) => SelectionStrategy::Random { seed: rng.next_u64() },
            None => config.strategy,
        };

        let u = match eps_subgradient(&problem.b, &state.x, eps, strategy) {
            Ok(u) => u,
            Err(e) => {
                let e = match e {
                    Error::EmptySubdifferential { .. } if exact => Error::BaselineInapplicable {
                        n,
                        source: Box::new(e),
                    },
                    e => e,
                };
                failure = Some(failure_at(n, e));
                break;
            }
        };
        let eps_u_norm = eps * u.norm();
        h1_sup = h1_sup.max(eps_u_norm);
        if n % config.record_every == 0 {
            rows.push(TraceRow {
                n,
                lambda,
                eps,
                x: state.x.clone(),
                xbar: state.xbar.clone(),
                eps_u_norm,
                dist_to_solution: problem.dist_to_solution(&state.xbar),
            });
        }

        let x_next = match forward_backward(problem, &state.x, &u, lambda) {
            Ok(x) => x,
            Err(e) => {
                failure = Some(failure_at(n, e));
                break;
            }
        };
        let (weight, _) = schedule_at(&config.schedule, n + 1)?;
        state = average_update(&state, x_next, weight)?;
        state.last_u = Some(u);

        if let (Some(tol), Some(d)) = (config.early_stop_tol, problem.dist_to_solution(&state.xbar)) {
            if d < tol {
                stopped_early = true;
                break;
            }
        }
    }

    Ok(ConvergenceTrace {
        header: TraceHeader {
            algorithm: Some(algorithm),
            schedule: Some(config.schedule.clone()),
            strategy: Some(config.strategy),
            schedule_valid: Some(validity.valid),
            unsafe_schedule: config.unsafe_schedule,
            max_iter: config.max_iter,
            record_every: config.record_every,
        },
        rows,
        h1_sup,
        final_dist: problem.dist_to_solution(&state.xbar),
        final_state: Some(state),
        stopped_early,
        failure,
    })
}

fn failure_at(n: usize, error: Error) -> RunFailure {
    RunFailure {
        n,
        message: error.to_string(),
        error: Some(error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_example() -> ProblemSpec {
        ProblemSpec::new(
            ConvexFunctionOracle::indicator(ConvexSet::singleton(Point::scalar(0.0))),
            ConvexFunctionOracle::NegSqrt,
            Point::scalar(4.0),
        )
        .unwrap()
        .with_solution_set(ConvexSet::singleton(Point::scalar(0.0)))
    }

    #[test]
    fn first_step_of_paper_example() {
        let p = paper_example();
        let s = IterationState::new(p.x0.clone());
        let (next, u) = efb_step(&p, &s, 1.0, 1.0, 0.5, SelectionStrategy::MinNorm).unwrap();
        assert_eq!(u, Point::scalar(-0.25));
        assert_eq!(next.x, Point::scalar(0.0));
        assert_eq!(next.n, 1);
        assert_eq!(next.last_u, Some(u));
    }

    #[test]
    fn steady_state_of_paper_example() {
        let p = paper_example();
        let s = IterationState::new(Point::scalar(0.0));
        for (lambda, eps) in [(0.5, 0.8), (0.01, 0.2), (1e-4, 0.05)] {
            let (next, u) = efb_step(&p, &s, lambda, eps, lambda, SelectionStrategy::Boundary).unwrap();
            assert_eq!(u, Point::scalar(-1.0 / (4.0 * eps)));
            assert_eq!(next.x, Point::scalar(0.0));
        }
    }

    #[test]
    fn plain_gradient_step() {
        let p = ProblemSpec::new(
            ConvexFunctionOracle::indicator(ConvexSet::whole(1)),
            ConvexFunctionOracle::quadratic(Point::scalar(0.0)),
            Point::scalar(1.0),
        )
        .unwrap();
        let s = IterationState::new(p.x0.clone());
        let (next, u) = efb_step(&p, &s, 0.5, 1e-12, 0.5, SelectionStrategy::MinNorm).unwrap();
        assert_eq!(u, Point::scalar(1.0));
        assert_eq!(next.x, Point::scalar(0.5));
    }

    #[test]
    fn step_preconditions() {
        let p = paper_example();
        let s = IterationState::new(p.x0.clone());
        assert!(efb_step(&p, &s, 1.0, 0.0, 1.0, SelectionStrategy::MinNorm).is_err());
        assert!(efb_step(&p, &s, -1.0, 1.0, 1.0, SelectionStrategy::MinNorm).is_err());
    }

    #[test]
    fn problem_construction_checks() {
        assert!(matches!(
            ProblemSpec::new(
                ConvexFunctionOracle::indicator(ConvexSet::singleton(Point::scalar(0.0))),
                ConvexFunctionOracle::NegSqrt,
                Point::scalar(-1.0),
            ),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            ProblemSpec::new(ConvexFunctionOracle::NegSqrt, ConvexFunctionOracle::Abs, Point::scalar(1.0)),
            Err(Error::UnsupportedResolvent(_))
        ));
    }

    #[test]
    fn zero_iterations_rejected() {
        let cfg = AlgorithmConfig::new(StepSchedule::canonical(), SelectionStrategy::MinNorm, 0);
        assert!(matches!(
            run_efb(&paper_example(), &cfg),
            Err(Error::InvalidParameter { name: "max_iter", .. })
        ));
    }

    #[test]
    fn invalid_schedule_rejected_unless_unsafe() {
        let bad = StepSchedule::power(1.0, 0.7, 0.7 / 3.0).unwrap();
        let cfg = AlgorithmConfig::new(bad, SelectionStrategy::MinNorm, 10);
        assert!(matches!(run_efb(&paper_example(), &cfg), Err(Error::InvalidSchedule { .. })));
        let trace = run_efb(&paper_example(), &cfg.with_unsafe_schedule(true)).unwrap();
        assert!(trace.header.unsafe_schedule);
        assert_eq!(trace.header.schedule_valid, Some(false));
    }

    #[test]
    fn thinning_keeps_ceiling_row_count() {
        let cfg = AlgorithmConfig::new(StepSchedule::canonical(), SelectionStrategy::Boundary, 10).with_record_every(3);
        let trace = run_efb(&paper_example(), &cfg).unwrap();
        let ns: Vec<usize> = trace.rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![0, 3, 6, 9]);
        assert_eq!(trace.h1_sup, 0.25);
        assert!(!trace.is_full_resolution());
    }

    #[test]
    fn projected_needs_indicator() {
        let p = ProblemSpec::new(
            ConvexFunctionOracle::quadratic(Point::scalar(0.0)),
            ConvexFunctionOracle::Abs,
            Point::scalar(1.0),
        )
        .unwrap();
        let cfg = AlgorithmConfig::new(StepSchedule::canonical(), SelectionStrategy::MinNorm, 5);
        assert!(matches!(
            run_projected_eps_subgradient(&p, &cfg),
            Err(Error::SpecializationMismatch(_))
        ));
    }

    #[test]
    fn passty_fails_on_paper_example() {
        let cfg = AlgorithmConfig::new(StepSchedule::power(1.0, 1.0, 1.0).unwrap(), SelectionStrategy::MinNorm, 50);
        let trace = run_passty_fb(&paper_example(), &cfg).unwrap();
        let failure = trace.failure.clone().unwrap();
        assert_eq!(failure.n, 1);
        assert!(failure.message.contains("exact subdifferential empty at x=0"), "{}", failure.message);
        assert!(matches!(trace.into_result(), Err(Error::BaselineInapplicable { n: 1, .. })));
    }

    #[test]
    fn passty_rejects_slow_steps() {
        let cfg = AlgorithmConfig::new(StepSchedule::power(1.0, 0.4, 0.1).unwrap(), SelectionStrategy::MinNorm, 5);
        assert!(matches!(run_passty_fb(&paper_example(), &cfg), Err(Error::InvalidSchedule { .. })));
    }

    #[test]
    fn early_stop() {
        let cfg = AlgorithmConfig::new(StepSchedule::canonical(), SelectionStrategy::MinNorm, 1000).with_early_stop(1e-9);
        let trace = run_efb(&paper_example(), &cfg).unwrap();
        assert!(trace.stopped_early);
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.final_dist, Some(0.0));
    }

    #[test]
    fn explicit_schedule_length_checked() {
        let s = StepSchedule::explicit(vec![1.0, 0.5], vec![1.0, 0.8]).unwrap();
        let cfg = AlgorithmConfig::new(s, SelectionStrategy::MinNorm, 3).with_unsafe_schedule(true);
        assert!(run_efb(&paper_example(), &cfg).is_err());
    }
}
