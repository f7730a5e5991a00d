use std::io::Write;
use std::path::Path;

use extsum::diagnostics::{diagnose, HypothesisReport};
use extsum::problems::{builtin, builtins, BuiltinProblem};
use extsum::schedule::{validate_schedule, StepSchedule};
use extsum::splitting::run_algorithm;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PartialConfig, RunConfig};
use crate::error::{CliError, FieldError};
use crate::tracefile::{read_trace, write_trace};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_HYPOTHESIS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub problem_id: String,
    pub rows: usize,
    pub final_dist: Option<f64>,
    pub h1_sup: f64,
    pub fejer_violations: Option<usize>,
    pub hypotheses_passed: bool,
    pub failure: Option<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        if self.failure.is_some() {
            EXIT_ERROR
        } else if !self.hypotheses_passed {
            EXIT_HYPOTHESIS
        } else {
            EXIT_OK
        }
    }

    pub fn line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:e}"));
        format!(
            "{}: rows={} final_dist={} h1_sup={} fejer_violations={} hypotheses={}",
            self.problem_id,
            self.rows,
            opt(self.final_dist),
            self.h1_sup,
            self.fejer_violations.map_or("n/a".to_string(), |v| v.to_string()),
            match (&self.failure, self.hypotheses_passed) {
                (Some(_), _) => "not checked (run failed)",
                (None, true) => "pass",
                (None, false) => "fail",
            }
        )
    }
}

/// Runs one configuration, writes its trace and checks the hypotheses.
/// A run stopped by an oracle failure still writes its partial trace.
pub fn run_one(config: &RunConfig) -> Result<RunSummary, CliError> {
    let problem = builtin(&config.problem_id)?;
    let trace = run_algorithm(&problem.spec, &config.algorithm_config()?, config.algorithm)?;
    write_trace(&config.output_path, config.output_format, &trace, Some(config))?;
    let report = diagnose(&trace, Some(&problem));
    Ok(RunSummary {
        problem_id: problem.id.to_string(),
        rows: trace.rows.len(),
        final_dist: trace.final_dist,
        h1_sup: trace.h1_sup,
        fejer_violations: report.fejer.map(|f| f.violations),
        hypotheses_passed: report.passed,
        failure: trace.failure.map(|f| f.message),
    })
}

/// Resolves each config file (or the flags alone when there are none) with
/// `overrides` applied, then runs them on `jobs` threads.
pub fn cmd_run(
    files: &[impl AsRef<Path>],
    overrides: PartialConfig,
    jobs: usize,
    out: &mut impl Write,
    err: &mut impl Write,
) -> u8 {
    let configs = match resolve_configs(files, overrides) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let results: Vec<Result<RunSummary, CliError>> = pool.install(|| configs.par_iter().map(run_one).collect());

    let mut code = EXIT_OK;
    for (cfg, result) in configs.iter().zip(results) {
        let c = match result {
            Ok(s) => {
                let _ = writeln!(out, "{}", s.line());
                if let Some(f) = &s.failure {
                    let _ = writeln!(err, "error: {}: {f}", cfg.problem_id);
                }
                s.exit_code()
            }
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", cfg.problem_id);
                EXIT_ERROR
            }
        };
        code = worst(code, c);
    }
    code
}

fn worst(a: u8, b: u8) -> u8 {
    if a == EXIT_ERROR || b == EXIT_ERROR {
        EXIT_ERROR
    } else {
        a.max(b)
    }
}

fn resolve_configs(files: &[impl AsRef<Path>], overrides: PartialConfig) -> Result<Vec<RunConfig>, CliError> {
    if files.is_empty() {
        return Ok(vec![overrides.resolve()?]);
    }
    if files.len() > 1 && overrides.output_path.is_some() {
        return Err(CliError::InvalidConfig(vec![FieldError::new(
            "output_path",
            "cannot be overridden when running several configs",
        )]));
    }
    files
        .iter()
        .map(|f| {
            let path = f.as_ref();
            PartialConfig::from_file(path)?
                .overlay(overrides.clone())
                .resolve()
                .map_err(|e| CliError::Config {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })
        })
        .collect()
}

/// Prints each schedule relation with its verdict; exit 0 iff all hold.
pub fn cmd_validate_schedule(c: f64, p: f64, q: f64, out: &mut impl Write, err: &mut impl Write) -> u8 {
    let report = match StepSchedule::power(c, p, q).and_then(|s| validate_schedule(&s)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    for r in &report.relations {
        let mark = if r.holds { "holds" } else { "FAILS" };
        let _ = writeln!(out, "{mark:>5}  {:<30} {}", r.relation.describe(), r.detail);
    }
    let _ = writeln!(
        out,
        "schedule power(c={c}, p={p}, q={q}) is {}{}",
        if report.valid { "valid" } else { "invalid" },
        if report.canonical { " (eps_n^3 = lambda_n)" } else { "" }
    );
    if report.valid {
        EXIT_OK
    } else {
        EXIT_HYPOTHESIS
    }
}

/// Reads a trace and prints its hypothesis report as JSON.
pub fn cmd_diagnose(path: &Path, problem_id: Option<&str>, out: &mut impl Write, err: &mut impl Write) -> u8 {
    match diagnose_file(path, problem_id) {
        Ok(report) => {
            let _ = serde_json::to_writer_pretty(&mut *out, &report);
            let _ = writeln!(out);
            if report.passed {
                EXIT_OK
            } else {
                EXIT_HYPOTHESIS
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn diagnose_file(path: &Path, problem_id: Option<&str>) -> Result<HypothesisReport, CliError> {
    let (trace, config) = read_trace(path)?;
    let id = problem_id.map(str::to_string).or(config.map(|c| c.problem_id));
    let problem = id.as_deref().map(builtin).transpose()?;
    let dim = trace.rows[0].x.dim();
    if let Some(p) = &problem {
        if p.solution.dim() != dim {
            return Err(extsum::Error::DimensionMismatch {
                expected: p.solution.dim(),
                found: dim,
            }
            .into());
        }
    }
    Ok(diagnose(&trace, problem.as_ref()))
}

#[derive(Serialize)]
struct ProblemListing<'a> {
    id: &'a str,
    description: &'a str,
    dim: usize,
    x0: &'a [f64],
    solution: &'a [f64],
    notes: &'a extsum::problems::ProblemNotes,
}

impl<'a> From<&'a BuiltinProblem> for ProblemListing<'a> {
    fn from(p: &'a BuiltinProblem) -> Self {
        ProblemListing {
            id: p.id,
            description: p.description,
            dim: p.solution.dim(),
            x0: p.spec.x0.coords(),
            solution: p.solution.coords(),
            notes: &p.notes,
        }
    }
}

pub fn cmd_list_problems(json: bool, out: &mut impl Write) -> u8 {
    let problems = builtins();
    if json {
        let listing: Vec<ProblemListing> = problems.iter().map(Into::into).collect();
        let _ = serde_json::to_writer_pretty(&mut *out, &listing);
        let _ = writeln!(out);
    } else {
        for p in &problems {
            let _ = writeln!(
                out,
                "{:<16} {}\n{:<16} x0={} solution={} h1_bound={:.6} h2prime={:?} passty={}",
                p.id,
                p.description,
                "",
                p.spec.x0,
                p.solution,
                p.notes.h1_bound,
                p.notes.h2prime,
                if p.notes.passty_applicable { "applicable" } else { "inapplicable" }
            );
        }
    }
    EXIT_OK
}
