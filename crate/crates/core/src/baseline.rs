//! Deterministic-means baseline and stochastic re-evaluation of fixed
//! schedules, for measuring what modeling the uncertainty buys.

use crate::error::Result;
use crate::model::{Operator, PathCost, Problem, ShipOutcome};
use crate::search::{self, Solution, SolveOptions};

/// The same instance with every run and setup law collapsed to a point mass
/// at its mean. Solving it degenerates the engine to ordinary A*.
pub fn deterministic_problem(problem: &Problem) -> Problem {
    problem.with_deterministic_times()
}

#[derive(Clone, Debug)]
pub struct ScheduleEvaluation {
    pub cost: PathCost,
    pub per_order: Vec<ShipOutcome>,
}

/// Replay a fixed operator sequence under `problem`'s laws.
pub fn evaluate_schedule(problem: &Problem, operators: &[Operator]) -> Result<ScheduleEvaluation> {
    let replay = problem.replay(operators)?;
    Ok(ScheduleEvaluation {
        cost: replay.cost,
        per_order: replay.per_order,
    })
}

/// Side-by-side solve of the stochastic model and the deterministic
/// approximation, with the deterministic schedule re-priced stochastically.
#[derive(Clone, Debug)]
pub struct ComparisonRecord {
    pub stochastic: Solution,
    pub deterministic: Solution,
    /// The deterministic schedule replayed under the stochastic laws.
    pub det_eval: ScheduleEvaluation,
    pub e_stoch: f64,
    pub e_det_eval: f64,
    /// Relative reduction in expected penalty, zero when the deterministic
    /// schedule already costs nothing.
    pub improvement: f64,
}

pub fn compare(problem: &Problem, opts: &SolveOptions) -> Result<ComparisonRecord> {
    let stochastic = search::solve(problem, opts)?;
    let det_problem = deterministic_problem(problem);
    let deterministic = search::solve(&det_problem, opts)?;
    let det_eval = evaluate_schedule(problem, &deterministic.schedule.operators)?;

    let e_stoch = stochastic.schedule.cost.expected_penalty;
    let e_det_eval = det_eval.cost.expected_penalty;
    let improvement = if e_det_eval > 0.0 {
        (e_det_eval - e_stoch) / e_det_eval
    } else {
        0.0
    };
    Ok(ComparisonRecord {
        stochastic,
        deterministic,
        det_eval,
        e_stoch,
        e_det_eval,
        improvement,
    })
}
