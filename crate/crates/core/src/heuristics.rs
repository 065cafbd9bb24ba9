//! Admissible lower bounds on the remaining expected penalty.
//!
//! Both bounds come from relaxations: the parallel-machines bound prices
//! every unshipped order as if it shipped next, and the fractional-penalty
//! bound lets orders split fractionally with setups relaxed to zero,
//! filling capacity up to the earliest deadline greedily by penalty per
//! unit of expected work.

use crate::model::{LawCache, PathCost, Problem, State};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum HeuristicMode {
    Zero,
    ParallelMachines,
    FractionalPenalty,
    #[default]
    Max,
}

impl HeuristicMode {
    pub const ALL: [HeuristicMode; 4] = [
        HeuristicMode::Zero,
        HeuristicMode::ParallelMachines,
        HeuristicMode::FractionalPenalty,
        HeuristicMode::Max,
    ];
}

impl fmt::Display for HeuristicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            HeuristicMode::Zero => "zero",
            HeuristicMode::ParallelMachines => "parallel",
            HeuristicMode::FractionalPenalty => "fractional",
            HeuristicMode::Max => "max",
        };
        f.write_str(name)
    }
}

impl FromStr for HeuristicMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(HeuristicMode::Zero),
            "parallel" => Ok(HeuristicMode::ParallelMachines),
            "fractional" => Ok(HeuristicMode::FractionalPenalty),
            "max" => Ok(HeuristicMode::Max),
            other => Err(format!(
                "unknown heuristic `{other}` (expected zero|parallel|fractional|max)"
            )),
        }
    }
}

/// Lower bound obtained by letting every unshipped order ship next, each on
/// its own machine: the order pays its lateness probability after the
/// minimum work still separating it from a ship (production of the missing
/// units, plus one setup when the machine is configured for another product
/// and production is actually needed).
pub fn parallel_machines(state: &State, cost: &PathCost, problem: &Problem) -> f64 {
    let mut cache = LawCache::new(problem);
    parallel_machines_cached(state, cost, problem, &mut cache)
}

pub(crate) fn parallel_machines_cached(
    state: &State,
    cost: &PathCost,
    problem: &Problem,
    cache: &mut LawCache<'_>,
) -> f64 {
    let mut h = 0.0;
    for (j, order) in problem.orders().iter().enumerate() {
        if state.is_shipped(j) || order.weight == 0.0 {
            continue;
        }
        let missing = order.quantity.saturating_sub(state.inventory()[order.product]);
        let tail = if missing == 0 {
            // Could ship with no further work; a setup is never required.
            cost.time.prob_greater(order.deadline)
        } else if state.setup() == order.product {
            cache
                .make_law(order.product, missing)
                .tail_of_sum(&cost.time, order.deadline)
        } else {
            cache
                .make_then_setup_law(order.product, missing)
                .tail_of_sum(&cost.time, order.deadline)
        };
        h += order.weight * tail;
    }
    h
}

/// Lower bound from fractional shipping: restrict attention to the orders
/// sharing the earliest outstanding deadline, relax setups to zero and work
/// to its expected value, and fill the capacity left before that deadline
/// greedily by penalty density, splitting the marginal order fractionally.
/// Averaged over the atoms of the accumulated time law.
pub fn fractional_penalty(state: &State, cost: &PathCost, problem: &Problem) -> f64 {
    let mut earliest = f64::INFINITY;
    for (j, order) in problem.orders().iter().enumerate() {
        if !state.is_shipped(j) && order.deadline < earliest {
            earliest = order.deadline;
        }
    }
    if !earliest.is_finite() {
        return 0.0;
    }

    // (expected work, weight) per candidate, zero-work candidates dropped:
    // they ship free under the relaxation.
    let mut jobs: Vec<(f64, f64, usize)> = Vec::new();
    for (j, order) in problem.orders().iter().enumerate() {
        if state.is_shipped(j) || order.deadline != earliest {
            continue;
        }
        let missing = order.quantity.saturating_sub(state.inventory()[order.product]);
        if missing == 0 || order.weight == 0.0 {
            continue;
        }
        let work = missing as f64 * problem.products()[order.product].run_mean;
        jobs.push((work, order.weight, j));
    }
    if jobs.is_empty() {
        return 0.0;
    }
    // Decreasing penalty density; ties prefer shorter work, then input order.
    jobs.sort_by(|a, b| {
        (b.1 * a.0)
            .total_cmp(&(a.1 * b.0))
            .then(a.0.total_cmp(&b.0))
            .then(a.2.cmp(&b.2))
    });

    let mut h = 0.0;
    for (t, mass) in cost.time.atoms() {
        let mut capacity = (earliest - t).max(0.0);
        let mut penalty = 0.0;
        for &(work, weight, _) in &jobs {
            let served = (capacity / work).min(1.0);
            penalty += weight * (1.0 - served);
            capacity -= served * work;
        }
        h += mass * penalty;
    }
    h
}

pub fn h_max(state: &State, cost: &PathCost, problem: &Problem) -> f64 {
    parallel_machines(state, cost, problem).max(fractional_penalty(state, cost, problem))
}

pub(crate) fn evaluate_cached(
    mode: HeuristicMode,
    state: &State,
    cost: &PathCost,
    problem: &Problem,
    cache: &mut LawCache<'_>,
) -> f64 {
    match mode {
        HeuristicMode::Zero => 0.0,
        HeuristicMode::ParallelMachines => parallel_machines_cached(state, cost, problem, cache),
        HeuristicMode::FractionalPenalty => fractional_penalty(state, cost, problem),
        HeuristicMode::Max => parallel_machines_cached(state, cost, problem, cache)
            .max(fractional_penalty(state, cost, problem)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::model::{Operator, OrderSpec, Product};
    use approx::assert_abs_diff_eq;

    fn problem(orders: Vec<OrderSpec>) -> Problem {
        Problem::from_parts(
            vec![
                Product {
                    id: "A".into(),
                    run_mean: 2.0,
                    run_std: 0.2,
                    setup_mean: 5.0,
                    setup_std: 0.0,
                },
                Product {
                    id: "B".into(),
                    run_mean: 3.0,
                    run_std: 0.2,
                    setup_mean: 5.0,
                    setup_std: 0.0,
                },
            ],
            orders,
            "A",
            &[],
            true,
            0.25,
        )
        .unwrap()
    }

    fn spec(id: &str, product: &str, quantity: u32, deadline: f64, weight: f64) -> OrderSpec {
        OrderSpec {
            id: id.into(),
            product: product.into(),
            quantity,
            deadline,
            weight,
        }
    }

    #[test]
    fn all_heuristics_vanish_at_goal() {
        let p = problem(vec![spec("O1", "A", 3, 20.0, 2.0)]);
        let mut state = p.initial_state();
        state = p
            .apply(
                &state,
                Operator::Make {
                    product: 0,
                    quantity: 3,
                },
            )
            .unwrap();
        state = p.apply(&state, Operator::Ship { order: 0 }).unwrap();
        assert!(p.is_goal(&state));
        let cost = PathCost {
            expected_penalty: 0.3,
            time: DiscreteDistribution::point_mass(25.0, 0.25).unwrap(),
        };
        assert_eq!(parallel_machines(&state, &cost, &p), 0.0);
        assert_eq!(fractional_penalty(&state, &cost, &p), 0.0);
        assert_eq!(h_max(&state, &cost, &p), 0.0);
    }

    #[test]
    fn parallel_bound_is_tight_for_a_single_ready_order() {
        // Inventory already covers the order, so the bound is exactly the
        // penalty the ship would accrue right now.
        let p = Problem::from_parts(
            vec![Product {
                id: "A".into(),
                run_mean: 2.0,
                run_std: 0.2,
                setup_mean: 5.0,
                setup_std: 0.0,
            }],
            vec![spec("O1", "A", 3, 10.0, 2.5)],
            "A",
            &[("A".into(), 3)],
            true,
            0.25,
        )
        .unwrap();
        let state = p.initial_state();
        let cost = PathCost {
            expected_penalty: 0.0,
            time: DiscreteDistribution::truncated_normal(9.0, 1.0, 0.25).unwrap(),
        };
        let expected = 2.5 * cost.time.prob_greater(10.0);
        assert_abs_diff_eq!(
            parallel_machines(&state, &cost, &p),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fractional_greedy_serves_by_penalty_density() {
        // Two candidates with 10 expected minutes of work each, deadline 10:
        // the denser order is served fully, the other not at all.
        let p = problem(vec![
            spec("O1", "A", 5, 10.0, 6.0),
            spec("O2", "A", 5, 10.0, 1.0),
        ]);
        let state = p.initial_state();
        let cost = PathCost::initial(&p);
        assert_abs_diff_eq!(fractional_penalty(&state, &cost, &p), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fractional_splits_the_marginal_order() {
        // One candidate, 10 minutes of expected work, 5 minutes of capacity:
        // half the penalty remains.
        let p = problem(vec![spec("O1", "A", 5, 5.0, 4.0)]);
        let state = p.initial_state();
        let cost = PathCost::initial(&p);
        assert_abs_diff_eq!(fractional_penalty(&state, &cost, &p), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fractional_is_zero_with_ample_capacity() {
        let p = problem(vec![
            spec("O1", "A", 5, 100.0, 6.0),
            spec("O2", "B", 5, 100.0, 1.0),
        ]);
        let state = p.initial_state();
        let cost = PathCost::initial(&p);
        assert_eq!(fractional_penalty(&state, &cost, &p), 0.0);
    }

    #[test]
    fn max_dominates_both_components() {
        let p = problem(vec![
            spec("O1", "A", 5, 12.0, 2.0),
            spec("O2", "B", 4, 12.0, 3.0),
        ]);
        let state = p.initial_state();
        let cost = PathCost {
            expected_penalty: 0.0,
            time: DiscreteDistribution::point_mass(2.0, 0.25).unwrap(),
        };
        let hp = parallel_machines(&state, &cost, &p);
        let hf = fractional_penalty(&state, &cost, &p);
        let hm = h_max(&state, &cost, &p);
        assert!(hm >= hp && hm >= hf);
        assert_eq!(hm, hp.max(hf));
    }

    #[test]
    fn two_order_example_has_negligible_root_bound() {
        // Each order fits comfortably on its own: means 220 and 250 against
        // a 480-minute deadline, so both tails vanish.
        let p = Problem::from_parts(
            vec![
                Product {
                    id: "X".into(),
                    run_mean: 20.0,
                    run_std: 2.0,
                    setup_mean: 5.0,
                    setup_std: 0.0,
                },
                Product {
                    id: "Y".into(),
                    run_mean: 30.0,
                    run_std: 2.0,
                    setup_mean: 10.0,
                    setup_std: 0.0,
                },
            ],
            vec![
                spec("R1", "X", 11, 480.0, 1.0),
                spec("R2", "Y", 8, 480.0, 1.0),
            ],
            "X",
            &[],
            true,
            0.25,
        )
        .unwrap();
        let state = p.initial_state();
        let cost = PathCost::initial(&p);
        assert!(parallel_machines(&state, &cost, &p) < 1e-9);
    }
}
