use extsum::diagnostics::{check_fejer, check_h1, check_h2prime, diagnose, H1Trend, H2Status};
use extsum::oracles::probes::linspace;
use extsum::problems::{builtin, builtins};
use extsum::splitting::{run_efb, run_passty_fb, AlgorithmConfig};
use extsum::{ConvergenceTrace, Point, SelectionStrategy, StepSchedule, TraceRow};

fn cfg(strategy: SelectionStrategy, max_iter: usize) -> AlgorithmConfig {
    AlgorithmConfig::new(StepSchedule::canonical(), strategy, max_iter)
}

#[test]
fn efb_and_passty_agree_on_smooth_b() {
    for id in ["quad-halfspace", "quad-box-2d"] {
        let p = builtin(id).unwrap();
        let c = cfg(SelectionStrategy::MinNorm, 5_000);
        let a = run_efb(&p.spec, &c).unwrap();
        let b = run_passty_fb(&p.spec, &c).unwrap();
        assert!(a.failure.is_none() && b.failure.is_none());
        for (r, s) in a.rows.iter().zip(&b.rows) {
            let bits = |p: &Point| p.coords().iter().map(|c| c.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&r.x), bits(&s.x), "{id} n={}", r.n);
            assert_eq!(bits(&r.xbar), bits(&s.xbar), "{id} n={}", r.n);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for p in builtins() {
        let c = cfg(SelectionStrategy::Random { seed: 99 }, 3_000);
        assert_eq!(run_efb(&p.spec, &c).unwrap(), run_efb(&p.spec, &c).unwrap(), "{}", p.id);
    }
}

#[test]
fn fejer_holds_on_builtins_for_every_strategy() {
    for p in builtins() {
        for s in [
            SelectionStrategy::MinNorm,
            SelectionStrategy::Boundary,
            SelectionStrategy::Random { seed: 3 },
        ] {
            let trace = run_efb(&p.spec, &cfg(s, 5_000)).unwrap();
            assert!(trace.failure.is_none(), "{} {s:?}", p.id);
            assert!(trace.h1_sup <= p.notes.h1_bound, "{} {s:?}: {}", p.id, trace.h1_sup);
            let r = check_fejer(&trace, &p.solution, p.notes.h1_bound).unwrap();
            assert_eq!(r.violations, 0, "{} {s:?}: {r:?}", p.id);
            let report = diagnose(&trace, Some(&p));
            assert!(report.passed, "{} {s:?}: {report:?}", p.id);
        }
    }
}

#[test]
fn h2prime_on_builtins() {
    let probes = linspace(-10.0, 10.0, 2001);
    let expect = [("quad-halfspace", Some(1.0)), ("abs-box", Some(-1.0)), ("paper-example", None)];
    for (id, v) in expect {
        let p = builtin(id).unwrap();
        let r = check_h2prime(&p.spec, std::slice::from_ref(&p.solution), &probes).unwrap();
        assert_eq!(r.verified_points.first().map(|w| w.v[0]), v, "{id}");
        assert_eq!(p.notes.h2prime == H2Status::Verified, v.is_some());
    }
}

#[test]
fn h1_on_paper_example_is_a_quarter_and_flat() {
    let p = builtin("paper-example").unwrap();
    let trace = run_efb(&p.spec, &cfg(SelectionStrategy::Boundary, 10_000)).unwrap();
    let r = check_h1(&trace, Some(p.notes.h1_bound));
    assert_eq!(r.sup, 0.25);
    assert_eq!(r.trend, H1Trend::Plateau);
    assert!(!r.violated);
}

#[test]
fn unsafe_schedule_is_rejected_unless_allowed() {
    let p = builtin("abs-box").unwrap();
    let bad = StepSchedule::power(1.0, 0.5, 0.1).unwrap();
    let c = AlgorithmConfig::new(bad, SelectionStrategy::MinNorm, 100);
    assert!(run_efb(&p.spec, &c).is_err());
    let trace = run_efb(&p.spec, &c.with_unsafe_schedule(true)).unwrap();
    assert_eq!(trace.header.schedule_valid, Some(false));
}

#[test]
fn growing_eps_u_is_flagged() {
    let rows = (0..400)
        .map(|n| TraceRow {
            n,
            lambda: 1.0,
            eps: 1.0,
            x: Point::scalar(0.0),
            xbar: Point::scalar(0.0),
            eps_u_norm: n as f64 / 100.0,
            dist_to_solution: None,
        })
        .collect();
    let trace = ConvergenceTrace::from_rows(rows);
    let r = check_h1(&trace, Some(1.0));
    assert_eq!(r.trend, H1Trend::Growth);
    assert!(r.violated);
    assert!(!diagnose(&trace, None).passed);
}
