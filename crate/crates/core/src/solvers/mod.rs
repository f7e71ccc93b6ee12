//! Exact and greedy solvers, exact demand queries, and the optimizers for
//! the normalized NO bound.

mod brute;
mod demand;
mod greedy;
mod profile_opt;

pub use brute::{
    brute_force_cpp, brute_force_cpp_with, brute_force_maxmin, brute_force_maxmin_with,
    brute_force_welfare, brute_force_welfare_with, DEFAULT_GUARD,
};
pub use demand::{demand_query, exhaustive_demand, exhaustive_demand_from_table, DemandAnswer, PriceVector};
pub use greedy::{greedy_cpp, greedy_welfare};
pub use profile_opt::{
    lemma43_grid_opt, lemma43_grid_opt_with, lemma43_structured_opt, GridOptions, StructuredOpt,
};

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::instances::Allocation;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solver: String,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    pub witness: Allocation,
    pub nodes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl SolveResult {
    pub(crate) fn new(
        solver: &str,
        value: Rational,
        witness: Allocation,
        nodes: u64,
        elapsed: Duration,
    ) -> Self {
        SolveResult {
            solver: solver.to_string(),
            value,
            witness,
            nodes,
            elapsed_ms: Some(elapsed.as_secs_f64() * 1e3),
        }
    }

    /// Drops the wall-clock field so outputs are byte-reproducible.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = None;
        self
    }
}
