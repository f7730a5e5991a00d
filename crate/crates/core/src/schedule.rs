//! Step-size and tolerance schedules `(lambda_n, eps_n)` and their validation.
//!
//! Power schedules `lambda_n = c n^-p`, `eps_n = n^-q` are validated analytically
//! through p-series exponents. Explicit finite lists can only be judged
//! heuristically, by fitting a power law to the tail of each series.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `lambda_n = c * n^(-p)`, `eps_n = n^(-q)`.
    Power { c: f64, p: f64, q: f64 },
    /// Explicit values for `n = 1..=len`; index 0 reuses the first entry.
    Explicit { lambdas: Vec<f64>, eps: Vec<f64> },
}

impl StepSchedule {
    pub fn power(c: f64, p: f64, q: f64) -> Result<Self> {
        check_power_params(c, p, q)?;
        Ok(StepSchedule::Power { c, p, q })
    }

    /// The reference schedule `lambda_n = 1/n`, `eps_n = n^(-1/3)`.
    pub fn canonical() -> Self {
        StepSchedule::Power {
            c: 1.0,
            p: 1.0,
            q: 1.0 / 3.0,
        }
    }

    pub fn explicit(lambdas: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        check_explicit(&lambdas, &eps)?;
        Ok(StepSchedule::Explicit { lambdas, eps })
    }

    /// Number of distinct indices available, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            StepSchedule::Power { .. } => None,
            StepSchedule::Explicit { lambdas, .. } => Some(lambdas.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn at(&self, n: usize) -> Result<(f64, f64)> {
        schedule_at(self, n)
    }
}

impl fmt::Display for StepSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Power { c, p, q } => write!(f, "power(c={c}, p={p}, q={q})"),
            StepSchedule::Explicit { lambdas, .. } => write!(f, "explicit(len={})", lambdas.len()),
        }
    }
}

fn check_power_params(c: f64, p: f64, q: f64) -> Result<()> {
    for (name, value) in [("c", c), ("p", p), ("q", q)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::invalid(name, format!("must be finite and positive, got {value}")));
        }
    }
    Ok(())
}

fn check_explicit(lambdas: &[f64], eps: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::invalid("lambdas", "explicit schedule must be nonempty"));
    }
    if lambdas.len() != eps.len() {
        return Err(Error::invalid(
            "eps",
            format!("length {} differs from lambdas length {}", eps.len(), lambdas.len()),
        ));
    }
    for (name, values) in [("lambdas", lambdas), ("eps", eps)] {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(name, format!("entries must be finite and positive, got {v}")));
        }
    }
    Ok(())
}

/// Returns `(lambda_n, eps_n)`. Index 0 maps to the index-1 values.
pub fn schedule_at(spec: &StepSchedule, n: usize) -> Result<(f64, f64)> {
    let n = n.max(1);
    match spec {
        StepSchedule::Power { c, p, q } => {
            let nf = n as f64;
            Ok((c * nf.powf(-p), nf.powf(-q)))
        }
        StepSchedule::Explicit { lambdas, eps } => {
            if n > lambdas.len() {
                return Err(Error::OutOfRange {
                    index: n,
                    len: lambdas.len(),
                });
            }
            Ok((lambdas[n - 1], eps[n - 1]))
        }
    }
}

/// A summability relation on the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `sum lambda_n = +inf`
    LambdaSumDiverges,
    /// `sum (lambda_n / eps_n)^2 < +inf`
    RatioSquaredSummable,
    /// `sum lambda_n * eps_n < +inf`
    LambdaEpsSummable,
    /// `eps_n` decreases to 0
    EpsDecreasesToZero,
    /// `sum lambda_n^2 < +inf` (classical forward-backward baseline)
    LambdaSquaredSummable,
}

impl Relation {
    pub fn describe(self) -> &'static str {
        match self {
            Relation::LambdaSumDiverges => "sum lambda_n = inf",
            Relation::RatioSquaredSummable => "sum (lambda_n/eps_n)^2 < inf",
            Relation::LambdaEpsSummable => "sum lambda_n*eps_n < inf",
            Relation::EpsDecreasesToZero => "eps_n decreases to 0",
            Relation::LambdaSquaredSummable => "sum lambda_n^2 < inf",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub relation: Relation,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    /// True when the verdict comes from tail fitting of a finite list.
    pub heuristic: bool,
    /// True for `q = p/3` with `c = 1`, i.e. `eps_n^3 = lambda_n`.
    pub canonical: bool,
    pub relations: Vec<RelationVerdict>,
    /// Human-readable description of each violated relation.
    pub reasons: Vec<String>,
}

impl ValidityReport {
    fn from_relations(relations: Vec<RelationVerdict>, heuristic: bool, canonical: bool) -> Self {
        let reasons: Vec<String> = relations
            .iter()
            .filter(|r| !r.holds)
            .map(|r| format!("{} fails: {}", r.relation, r.detail))
            .collect();
        ValidityReport {
            valid: reasons.is_empty(),
            heuristic,
            canonical,
            relations,
            reasons,
        }
    }

    pub fn verdict(&self, relation: Relation) -> Option<bool> {
        self.relations
            .iter()
            .find(|r| r.relation == relation)
            .map(|r| r.holds)
    }
}

/// Verdict on a p-series `sum n^-s`, which converges iff `s > 1`.
fn p_series(relation: Relation, term: &str, exponent: f64, want_convergent: bool) -> RelationVerdict {
    p_series_tol(relation, term, exponent, want_convergent, 0.0)
}

fn p_series_tol(
    relation: Relation,
    term: &str,
    exponent: f64,
    want_convergent: bool,
    tol: f64,
) -> RelationVerdict {
    let converges = exponent > 1.0 + tol;
    let behaviour = if converges { "converges" } else { "diverges" };
    RelationVerdict {
        relation,
        holds: converges == want_convergent,
        detail: format!("sum {term} ~ sum n^-{exponent:.6} {behaviour}"),
    }
}

/// Checks the step relations under which the averaged iterates converge:
/// `sum lambda_n = inf`, `sum (lambda_n/eps_n)^2 < inf`, `sum lambda_n eps_n < inf`,
/// and `eps_n` decreasing to zero.
pub fn validate_schedule(spec: &StepSchedule) -> Result<ValidityReport> {
    match spec {
        StepSchedule::Power { c, p, q } => {
            let (c, p, q) = (*c, *p, *q);
            check_power_params(c, p, q)?;
            let relations = vec![
                p_series(Relation::LambdaSumDiverges, "lambda_n", p, false),
                p_series(
                    Relation::RatioSquaredSummable,
                    "(lambda_n/eps_n)^2",
                    2.0 * (p - q),
                    true,
                ),
                p_series(Relation::LambdaEpsSummable, "lambda_n*eps_n", p + q, true),
                RelationVerdict {
                    relation: Relation::EpsDecreasesToZero,
                    holds: q > 0.0,
                    detail: format!("eps_n = n^-{q}"),
                },
            ];
            let canonical = c == 1.0 && (q - p / 3.0).abs() <= 1e-12 * p;
            Ok(ValidityReport::from_relations(relations, false, canonical))
        }
        StepSchedule::Explicit { lambdas, eps } => {
            check_explicit(lambdas, eps)?;
            Ok(validate_explicit(lambdas, eps))
        }
    }
}

/// Checks the classical forward-backward conditions `sum lambda_n = inf`,
/// `sum lambda_n^2 < inf`.
pub fn validate_passty_schedule(spec: &StepSchedule) -> Result<ValidityReport> {
    match spec {
        StepSchedule::Power { c, p, q } => {
            check_power_params(*c, *p, *q)?;
            let relations = vec![
                p_series(Relation::LambdaSumDiverges, "lambda_n", *p, false),
                p_series(Relation::LambdaSquaredSummable, "lambda_n^2", 2.0 * p, true),
            ];
            Ok(ValidityReport::from_relations(relations, false, false))
        }
        StepSchedule::Explicit { lambdas, eps } => {
            check_explicit(lambdas, eps)?;
            let sq: Vec<f64> = lambdas.iter().map(|l| l * l).collect();
            let relations = vec![
                fitted(Relation::LambdaSumDiverges, "lambda_n", lambdas, false),
                fitted(Relation::LambdaSquaredSummable, "lambda_n^2", &sq, true),
            ];
            Ok(ValidityReport::from_relations(relations, true, false))
        }
    }
}

const MIN_HEURISTIC_LEN: usize = 8;
// Fitted exponents within this distance of 1 are treated as divergent.
const FIT_TOL: f64 = 1e-6;

fn validate_explicit(lambdas: &[f64], eps: &[f64]) -> ValidityReport {
    let ratio_sq: Vec<f64> = lambdas
        .iter()
        .zip(eps)
        .map(|(l, e)| (l / e).powi(2))
        .collect();
    let prod: Vec<f64> = lambdas.iter().zip(eps).map(|(l, e)| l * e).collect();
    let non_increasing = eps.windows(2).all(|w| w[1] <= w[0]);
    let eps_decay = fit_tail_exponent(eps);
    let decreasing = non_increasing && eps_decay.is_some_and(|s| s > 0.0);
    let relations = vec![
        fitted(Relation::LambdaSumDiverges, "lambda_n", lambdas, false),
        fitted(Relation::RatioSquaredSummable, "(lambda_n/eps_n)^2", &ratio_sq, true),
        fitted(Relation::LambdaEpsSummable, "lambda_n*eps_n", &prod, true),
        RelationVerdict {
            relation: Relation::EpsDecreasesToZero,
            holds: decreasing,
            detail: match eps_decay {
                Some(s) => format!(
                    "non-increasing: {non_increasing}, fitted tail decay n^-{s:.4} (heuristic)"
                ),
                None => "list too short for a tail fit".to_string(),
            },
        },
    ];
    ValidityReport::from_relations(relations, true, false)
}

fn fitted(relation: Relation, term: &str, values: &[f64], want_convergent: bool) -> RelationVerdict {
    match fit_tail_exponent(values) {
        Some(s) => {
            let mut v = p_series_tol(relation, term, s, want_convergent, FIT_TOL);
            v.detail.push_str(" (heuristic tail fit)");
            v
        }
        None => RelationVerdict {
            relation,
            holds: false,
            detail: format!("list shorter than {MIN_HEURISTIC_LEN}; no tail fit possible"),
        },
    }
}

/// Least-squares slope of `-ln t_n` against `ln n` over the second half of the list.
fn fit_tail_exponent(values: &[f64]) -> Option<f64> {
    let len = values.len();
    if len < MIN_HEURISTIC_LEN {
        return None;
    }
    let start = len / 2;
    let pts: Vec<(f64, f64)> = (start..len)
        .map(|i| (((i + 1) as f64).ln(), values[i].ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}
