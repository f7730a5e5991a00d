//! Convex function oracles, projections, resolvents and brute-force
//! validators for epsilon-subdifferentials and epsilon-enlargements.

mod check;
mod function;
pub mod probes;
mod set;

use serde::{Deserialize, Serialize};

pub use check::{
    check_eps_enlargement, check_eps_subgradient, check_eps_subgradient_tol, check_monotone_graph,
    SampledOperator, INEQUALITY_TOL,
};
pub use function::{eps_subgradient, resolvent, ConvexFunctionOracle, Subdifferential};
pub use set::{project, ConvexSet};

/// Which element of an epsilon-subdifferential to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionStrategy {
    #[default]
    MinNorm,
    Boundary,
    Random { seed: u64 },
}
