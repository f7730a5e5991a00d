//! Extended forward-backward splitting.
//!
//! Finds a zero of a maximal monotone operator `T` split as the extended sum
//! `A +e B`, i.e. `Tx = ∩_{ε>0} cl(A^ε x + B^ε x)`, through the iteration
//!
//! ```text
//! x_{n+1} = (I + λ_n A)^{-1} (x_n - λ_n u_n),   u_n ∈ B^{ε_n} x_n,
//! ```
//!
//! and reports the weighted averages `x̄_n = (1/σ_n) Σ_{k=1..n} λ_k x_k`.
//! The extended sum is never materialized: `A` is accessed through its
//! resolvent and `B` through epsilon-subgradient selections.
//!
//! Modules:
//! * [`schedule`] and [`state`]: step schedules, their validation, and the running average.
//! * [`oracles`]: closed-form epsilon-subgradients, projections, resolvents, brute-force validators.
//! * [`splitting`]: the iteration, its projected specialization and the classical baseline.
//! * [`diagnostics`]: executable checks of the convergence hypotheses and inequalities.
//! * [`problems`]: builtin problems with known solutions.

pub mod diagnostics;
pub mod error;
pub mod oracles;
pub mod point;
pub mod problems;
pub mod schedule;
pub mod splitting;
pub mod state;
pub mod trace;

pub use error::{Error, Result};
pub use oracles::{ConvexFunctionOracle, ConvexSet, SampledOperator, SelectionStrategy};
pub use point::Point;
pub use schedule::{schedule_at, validate_schedule, StepSchedule, ValidityReport};
pub use state::{average_update, IterationState};
pub use trace::{ConvergenceTrace, TraceRow};
