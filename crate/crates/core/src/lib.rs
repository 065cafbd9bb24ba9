//! Optimal scheduling for a single bottleneck machine making multiple
//! products under stochastic run and setup times, minimizing the expected
//! weighted number of tardy orders.
//!
//! Because ship penalties depend on the accumulated completion-time
//! distribution, operator costs are both stochastic and path-dependent, and
//! classic A* pruning is unsound. The [`search`] engine instead keeps, per
//! state, every path whose (expected penalty, time law) pair is not
//! stochastically dominated, and expands nodes by estimated expected
//! penalty with admissible lower bounds from [`heuristics`].
//!
//! ```
//! use lotsched::{gen, search, SolveOptions};
//!
//! let problem = gen::example_two_orders(1.0, 1.0);
//! let solution = search::solve(&problem, &SolveOptions::default()).unwrap();
//! assert!((solution.schedule.cost.expected_penalty - 0.125).abs() < 0.005);
//! ```
//!
//! Supporting pieces: exact distribution algebra on a uniform grid
//! ([`dist`]), the factory model ([`model`]), a deterministic-means baseline
//! ([`baseline`]), a Monte-Carlo cross-check ([`mc`]), a calibrated random
//! instance generator ([`gen`]), a batch comparison harness ([`harness`]),
//! and JSON document types ([`fileio`]).

pub mod baseline;
pub mod dist;
pub mod error;
pub mod fileio;
pub mod gen;
pub mod harness;
pub mod heuristics;
pub mod mc;
pub mod model;
pub mod search;

pub use crate::dist::DiscreteDistribution;
pub use crate::error::Error;
pub use crate::heuristics::HeuristicMode;
pub use crate::model::{Operator, PathCost, Problem, Schedule, State};
pub use crate::search::{solve, Limits, SearchStats, Solution, SolveOptions};

/// Execution strategy for trial batches and instance sweeps. `Auto` uses the
/// rayon thread pool when the `parallel` feature is enabled and falls back
/// to sequential execution otherwise; results are identical either way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Auto,
}

/// Whether this build can actually fan work out across threads.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
