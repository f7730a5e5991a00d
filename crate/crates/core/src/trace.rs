//! Per-iteration records of a run.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::oracles::SelectionStrategy;
use crate::point::Point;
use crate::schedule::StepSchedule;
use crate::state::IterationState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Extended forward-backward iteration.
    Efb,
    /// Projected epsilon-subgradient specialization (`A` an indicator).
    ProjectedEpsSubgrad,
    /// Classical forward-backward with exact subgradients.
    Passty,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Efb => "efb",
            Algorithm::ProjectedEpsSubgrad => "projected_eps_subgrad",
            Algorithm::Passty => "passty",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recorded iteration: the iterate `x_n`, the average `xbar_n`, the step
/// parameters used to leave `x_n`, and `eps_n * ||u_n||` for the selection at `x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub lambda: f64,
    pub eps: f64,
    pub x: Point,
    pub xbar: Point,
    pub eps_u_norm: f64,
    pub dist_to_solution: Option<f64>,
}

/// Run metadata. Fields are optional so that traces read back from plain
/// row files can be represented too.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algorithm: Option<Algorithm>,
    pub schedule: Option<StepSchedule>,
    pub strategy: Option<SelectionStrategy>,
    pub schedule_valid: Option<bool>,
    pub unsafe_schedule: bool,
    pub max_iter: usize,
    pub record_every: usize,
}

/// Where and why a run stopped before `max_iter`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub n: usize,
    pub message: String,
    #[serde(skip)]
    pub error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
    /// Running supremum of `eps_n ||u_n||` over every step, recorded or not.
    pub h1_sup: f64,
    /// State after the last completed step.
    pub final_state: Option<IterationState>,
    pub final_dist: Option<f64>,
    pub stopped_early: bool,
    pub failure: Option<RunFailure>,
}

impl ConvergenceTrace {
    /// Wraps bare rows, e.g. read back from a file. The recording stride is
    /// inferred from the smallest index gap.
    pub fn from_rows(rows: Vec<TraceRow>) -> Self {
        let record_every = rows
            .windows(2)
            .map(|w| w[1].n.saturating_sub(w[0].n))
            .min()
            .unwrap_or(1)
            .max(1);
        let h1_sup = rows.iter().map(|r| r.eps_u_norm).fold(0.0, f64::max);
        ConvergenceTrace {
            header: TraceHeader {
                record_every,
                max_iter: rows.last().map_or(0, |r| r.n + 1),
                ..TraceHeader::default()
            },
            rows,
            h1_sup,
            final_state: None,
            final_dist: None,
            stopped_early: false,
            failure: None,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Converts a failed run into its error.
    pub fn into_result(self) -> crate::Result<Self> {
        match &self.failure {
            Some(RunFailure { error: Some(e), .. }) => Err(e.clone()),
            _ => Ok(self),
        }
    }

    /// True when every index from the first row onward is present.
    pub fn is_full_resolution(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].n == w[0].n + 1)
    }

    pub fn last_xbar(&self) -> Option<&Point> {
        self.final_state
            .as_ref()
            .map(|s| &s.xbar)
            .or_else(|| self.rows.last().map(|r| &r.xbar))
    }
}
