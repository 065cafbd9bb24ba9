//! Shared test oracles, independent of the search engine: exhaustive
//! depth-first enumeration of the restricted operator space and closed-form
//! normal tails.

use lotsched::{PathCost, Problem, State};
use statrs::function::erf::erfc;

/// Minimum expected penalty over every complete operator sequence, found by
/// plain depth-first enumeration with branch-and-bound on the (monotone)
/// accrued expected penalty. Uses only the model's operator generator and
/// cost transition, never the search engine.
pub fn brute_force_optimum(problem: &Problem) -> f64 {
    brute_force_from(problem, &problem.initial_state(), &PathCost::initial(problem))
}

/// Minimum final expected penalty over completions of a partial path that
/// has reached `state` with accumulated `cost`.
pub fn brute_force_from(problem: &Problem, state: &State, cost: &PathCost) -> f64 {
    let mut best = f64::INFINITY;
    dfs(problem, state, cost, &mut best);
    assert!(
        best.is_finite(),
        "every instance in the oracle suite must be solvable"
    );
    best
}

fn dfs(problem: &Problem, state: &State, cost: &PathCost, best: &mut f64) {
    if cost.expected_penalty >= *best {
        return;
    }
    if problem.is_goal(state) {
        *best = cost.expected_penalty;
        return;
    }
    for op in problem.applicable_operators(state) {
        let child_cost = problem.transition_cost(cost, op);
        let child_state = problem.apply(state, op).expect("generated operator applies");
        dfs(problem, &child_state, &child_cost, best);
    }
}

/// `P(N(mean, var) > d)`.
pub fn normal_tail(mean: f64, var: f64, d: f64) -> f64 {
    let z = (d - mean) / var.sqrt();
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}
