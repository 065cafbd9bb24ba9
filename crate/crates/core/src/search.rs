//! Best-first search over schedules with per-state frontiers of mutually
//! nondominated path costs.
//!
//! Plain A* is not sound here: ship penalties depend on the accumulated
//! time distribution, so a path that looks worse now can finish better.
//! Instead of keeping one best path per state, the engine keeps every path
//! whose cost pair (expected penalty, time law) is not weakly dominated by
//! another path to the same state, expands nodes in order of estimated
//! expected penalty, and stops at the first goal popped.

use crate::error::{Error, Result};
use crate::heuristics::{self, HeuristicMode};
use crate::model::{LawCache, Operator, PathCost, Problem, Schedule, State};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

/// Slack on expected-penalty comparisons in the dominance test.
const PENALTY_TOL: f64 = 1e-12;
/// Slack on the nondecreasing-pop-priority check.
const PRIORITY_SLACK: f64 = 1e-9;

/// True iff `a` may be pruned in favor of `b`: `b` has no larger expected
/// penalty and its time law is stochastically no later. Weak dominance, so
/// equal costs dominate each other; callers keep the earlier path.
pub fn dominated_by(a: &PathCost, b: &PathCost) -> bool {
    b.expected_penalty <= a.expected_penalty + PENALTY_TOL
        && b.time.dominates(&a.time).expect("costs share one grid")
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    /// Paths pruned by dominance: children discarded on arrival plus
    /// frontier members invalidated by a dominating arrival.
    pub dominations: u64,
    pub peak_open: usize,
    pub wall_time: Duration,
    /// Pops whose priority decreased; possible only under heuristics that
    /// are not consistent (the fractional bound and anything built on it).
    pub priority_regressions: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub max_expansions: Option<u64>,
    pub max_wall: Option<Duration>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub heuristic: HeuristicMode,
    /// Disable to keep every generated path (exhaustive best-first); used to
    /// validate that dominance pruning never changes the optimum.
    pub prune: bool,
    pub limits: Limits,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            heuristic: HeuristicMode::default(),
            prune: true,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub schedule: Schedule,
    pub stats: SearchStats,
}

struct Node {
    state: State,
    cost: PathCost,
    parent: Option<u32>,
    via: Option<Operator>,
    alive: bool,
}

/// Min-ordering on (priority, h, insertion order). Lower h first prefers
/// deeper, more settled paths among ties.
#[derive(PartialEq)]
struct OpenEntry {
    priority: f64,
    h: f64,
    id: u32,
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.h.total_cmp(&other.h))
            .then(self.id.cmp(&other.id))
    }
}

/// Find a schedule minimizing expected penalty.
pub fn solve(problem: &Problem, opts: &SolveOptions) -> Result<Solution> {
    solve_with_observer(problem, opts, |_, _, _| ())
}

/// [`solve`], invoking `observe(state, cost, h)` on every node expansion.
pub fn solve_with_observer<F>(problem: &Problem, opts: &SolveOptions, mut observe: F) -> Result<Solution>
where
    F: FnMut(&State, &PathCost, f64),
{
    let start = Instant::now();
    let mut cache = LawCache::new(problem);
    let mut stats = SearchStats::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut open: BinaryHeap<Reverse<OpenEntry>> = BinaryHeap::new();
    let mut frontiers: HashMap<State, Vec<u32>> = HashMap::new();
    // Best goal generated so far, for the incumbent on limit errors.
    let mut best_goal: Option<(f64, u32)> = None;

    let root_state = problem.initial_state();
    let root_cost = PathCost::initial(problem);
    let root_h = heuristics::evaluate_cached(opts.heuristic, &root_state, &root_cost, problem, &mut cache);
    nodes.push(Node {
        state: root_state.clone(),
        cost: root_cost.clone(),
        parent: None,
        via: None,
        alive: true,
    });
    if opts.prune {
        frontiers.insert(root_state, vec![0]);
    }
    open.push(Reverse(OpenEntry {
        priority: root_cost.expected_penalty + root_h,
        h: root_h,
        id: 0,
    }));
    stats.peak_open = 1;

    let mut last_priority = f64::NEG_INFINITY;

    while let Some(Reverse(entry)) = open.pop() {
        let idx = entry.id as usize;
        if !nodes[idx].alive {
            continue;
        }

        if problem.is_goal(&nodes[idx].state) {
            stats.wall_time = start.elapsed();
            let schedule = reconstruct(problem, &nodes, entry.id)?;
            return Ok(Solution { schedule, stats });
        }

        if entry.priority + PRIORITY_SLACK < last_priority {
            match opts.heuristic {
                HeuristicMode::Zero | HeuristicMode::ParallelMachines => {
                    return Err(Error::InvariantViolation(format!(
                        "pop priority decreased from {last_priority} to {} under an \
                         order-preserving heuristic",
                        entry.priority
                    )));
                }
                _ => stats.priority_regressions += 1,
            }
        }
        last_priority = last_priority.max(entry.priority);

        if let Some(cap) = opts.limits.max_expansions {
            if stats.expansions >= cap {
                return Err(limit_error(problem, &nodes, &stats, start, best_goal));
            }
        }
        if let Some(cap) = opts.limits.max_wall {
            if start.elapsed() >= cap {
                return Err(limit_error(problem, &nodes, &stats, start, best_goal));
            }
        }

        stats.expansions += 1;
        observe(&nodes[idx].state, &nodes[idx].cost, entry.h);

        for op in problem.applicable_operators(&nodes[idx].state) {
            let child_cost = cache.transition(&nodes[idx].cost, op);
            let child_state = problem.apply_unchecked(&nodes[idx].state, op);
            stats.generated += 1;

            if opts.prune {
                let frontier = frontiers.entry(child_state.clone()).or_default();
                if frontier
                    .iter()
                    .any(|&m| dominated_by(&child_cost, &nodes[m as usize].cost))
                {
                    stats.dominations += 1;
                    continue;
                }
                frontier.retain(|&m| {
                    if dominated_by(&nodes[m as usize].cost, &child_cost) {
                        nodes[m as usize].alive = false;
                        stats.dominations += 1;
                        false
                    } else {
                        true
                    }
                });
            }

            let h = heuristics::evaluate_cached(opts.heuristic, &child_state, &child_cost, problem, &mut cache);
            let child_id = nodes.len() as u32;
            if problem.is_goal(&child_state) {
                let e = child_cost.expected_penalty;
                if best_goal.map_or(true, |(best, _)| e < best) {
                    best_goal = Some((e, child_id));
                }
            }
            let priority = child_cost.expected_penalty + h;
            nodes.push(Node {
                state: child_state.clone(),
                cost: child_cost,
                parent: Some(entry.id),
                via: Some(op),
                alive: true,
            });
            if opts.prune {
                frontiers
                    .get_mut(&child_state)
                    .expect("frontier entry created above")
                    .push(child_id);
            }
            open.push(Reverse(OpenEntry {
                priority,
                h,
                id: child_id,
            }));
        }
        stats.peak_open = stats.peak_open.max(open.len());
    }

    // Every order can always eventually ship unless initial inventory
    // strands one above its order quantity.
    Err(Error::InvariantViolation(
        "search space exhausted without reaching a goal".into(),
    ))
}

fn limit_error(
    problem: &Problem,
    nodes: &[Node],
    stats: &SearchStats,
    start: Instant,
    best_goal: Option<(f64, u32)>,
) -> Error {
    let incumbent = best_goal
        .and_then(|(_, id)| reconstruct(problem, nodes, id).ok())
        .map(Box::new);
    Error::LimitExceeded {
        expansions: stats.expansions,
        elapsed: start.elapsed().as_secs_f64(),
        incumbent,
    }
}

/// Walk the parent chain and replay it, so the returned schedule is checked
/// against the model and carries per-order outcomes.
fn reconstruct(problem: &Problem, nodes: &[Node], goal: u32) -> Result<Schedule> {
    let mut operators = Vec::new();
    let mut cur = goal as usize;
    while let Some(parent) = nodes[cur].parent {
        operators.push(nodes[cur].via.expect("non-root node has an operator"));
        cur = parent as usize;
    }
    operators.reverse();
    let replay = problem.replay(&operators).map_err(|e| {
        Error::InvariantViolation(format!("reconstructed path failed to replay: {e}"))
    })?;
    debug_assert_eq!(
        replay.cost, nodes[goal as usize].cost,
        "replay must reproduce the node cost exactly"
    );
    Ok(Schedule {
        operators,
        cost: replay.cost,
        per_order: replay.per_order,
    })
}
