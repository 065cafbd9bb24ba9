//! Batch benchmark harness: generate instances across a capacity sweep,
//! compare the stochastic solve against the deterministic baseline on each,
//! and aggregate improvement and search-effort statistics.

use crate::baseline;
use crate::gen::{self, GenSpec, WeightRule};
use crate::heuristics::HeuristicMode;
use crate::search::{Limits, SolveOptions};
use crate::Parallelism;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct BenchSpec {
    /// Inclusive range of order counts; each instance draws uniformly.
    pub orders: (usize, usize),
    /// Target capacity cells; `per_cell` instances are generated for each.
    pub capacities: Vec<f64>,
    pub per_cell: usize,
    pub seed: u64,
    pub horizon: f64,
    pub quantity_range: (u32, u32),
    pub weight_rule: WeightRule,
    pub grid_step: f64,
    pub heuristic: HeuristicMode,
    pub limits: Limits,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            orders: (6, 10),
            capacities: vec![0.95, 1.00, 1.05, 1.10, 1.15, 1.20, 1.25],
            per_cell: 10,
            seed: 1,
            horizon: 480.0,
            quantity_range: (5, 25),
            weight_rule: WeightRule::default(),
            grid_step: 0.25,
            heuristic: HeuristicMode::default(),
            limits: Limits {
                max_expansions: Some(2_000_000),
                max_wall: None,
            },
        }
    }
}

/// One instance's outcome. Numeric fields are absent when the instance
/// failed; `status` then carries the error.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub seed: u64,
    pub n_orders: usize,
    pub target_capacity: f64,
    /// Measured load / horizon of the generated instance.
    pub capacity: f64,
    pub e_stoch: Option<f64>,
    pub e_det_eval: Option<f64>,
    pub improvement: Option<f64>,
    pub expansions_stoch: Option<u64>,
    pub expansions_det: Option<u64>,
    pub dominations: Option<u64>,
    pub wall_ms: Option<f64>,
    pub status: String,
}

impl BenchRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug)]
pub struct CellStats {
    pub capacity: f64,
    pub instances: usize,
    pub mean_expansions_stoch: f64,
    pub mean_expansions_det: f64,
    pub mean_dominations: f64,
    pub mean_improvement: f64,
}

#[derive(Clone, Debug)]
pub struct BenchSummary {
    pub total: usize,
    pub failed: usize,
    /// Instances whose measured capacity exceeds 1.0.
    pub over_capacity: usize,
    /// Over-capacity instances where the stochastic schedule is strictly
    /// cheaper than the deterministic one evaluated stochastically.
    pub strictly_improved: usize,
    pub strict_improvement_fraction: f64,
    /// Mean relative improvement over the strictly improved instances.
    pub mean_improvement_among_improved: f64,
    pub cells: Vec<CellStats>,
}

pub fn run_bench(spec: &BenchSpec) -> (Vec<BenchRow>, BenchSummary) {
    run_bench_with(spec, Parallelism::Auto)
}

pub fn run_bench_with(spec: &BenchSpec, parallelism: Parallelism) -> (Vec<BenchRow>, BenchSummary) {
    let mut tasks = Vec::new();
    for &capacity in &spec.capacities {
        for _ in 0..spec.per_cell {
            let index = tasks.len() as u64;
            tasks.push((spec.seed.wrapping_add(index), capacity));
        }
    }

    let run_one = |&(seed, capacity): &(u64, f64)| run_instance(spec, seed, capacity);
    let rows: Vec<BenchRow> = match parallelism {
        Parallelism::Sequential => tasks.iter().map(run_one).collect(),
        Parallelism::Auto => map_auto(&tasks, run_one),
    };
    let summary = summarize(spec, &rows);
    (rows, summary)
}

#[cfg(feature = "parallel")]
fn map_auto<F>(tasks: &[(u64, f64)], run_one: F) -> Vec<BenchRow>
where
    F: Fn(&(u64, f64)) -> BenchRow + Sync + Send,
{
    use rayon::prelude::*;
    // Rows come back in task order, so output is independent of scheduling.
    tasks.par_iter().map(run_one).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_auto<F>(tasks: &[(u64, f64)], run_one: F) -> Vec<BenchRow>
where
    F: Fn(&(u64, f64)) -> BenchRow + Sync + Send,
{
    tasks.iter().map(run_one).collect()
}

fn run_instance(spec: &BenchSpec, seed: u64, target_capacity: f64) -> BenchRow {
    let (lo, hi) = spec.orders;
    let mut nrng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let n_orders = nrng.gen_range(lo..=hi.max(lo));

    let mut row = BenchRow {
        seed,
        n_orders,
        target_capacity,
        capacity: f64::NAN,
        e_stoch: None,
        e_det_eval: None,
        improvement: None,
        expansions_stoch: None,
        expansions_det: None,
        dominations: None,
        wall_ms: None,
        status: "ok".into(),
    };

    let gen_spec = GenSpec {
        n_orders,
        target_capacity,
        horizon: spec.horizon,
        quantity_range: spec.quantity_range,
        weight_rule: spec.weight_rule,
        seed,
        grid_step: spec.grid_step,
    };
    let problem = match gen::generate(&gen_spec) {
        Ok(p) => p,
        Err(e) => {
            row.status = format!("generation: {e}");
            return row;
        }
    };
    row.capacity = gen::estimated_load(&problem) / spec.horizon;

    let opts = SolveOptions {
        heuristic: spec.heuristic,
        prune: true,
        limits: spec.limits,
    };
    let start = Instant::now();
    match baseline::compare(&problem, &opts) {
        Ok(record) => {
            row.e_stoch = Some(record.e_stoch);
            row.e_det_eval = Some(record.e_det_eval);
            row.improvement = Some(record.improvement);
            row.expansions_stoch = Some(record.stochastic.stats.expansions);
            row.expansions_det = Some(record.deterministic.stats.expansions);
            row.dominations = Some(record.stochastic.stats.dominations);
            row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        Err(e) => row.status = format!("solve: {e}"),
    }
    row
}

const IMPROVEMENT_EPS: f64 = 1e-9;

fn summarize(spec: &BenchSpec, rows: &[BenchRow]) -> BenchSummary {
    let failed = rows.iter().filter(|r| !r.is_ok()).count();

    let mut over_capacity = 0;
    let mut strictly_improved = 0;
    let mut improvement_sum = 0.0;
    for row in rows.iter().filter(|r| r.is_ok()) {
        if row.capacity > 1.0 {
            over_capacity += 1;
            let e_stoch = row.e_stoch.unwrap();
            let e_det = row.e_det_eval.unwrap();
            if e_det - e_stoch > IMPROVEMENT_EPS {
                strictly_improved += 1;
                improvement_sum += row.improvement.unwrap();
            }
        }
    }

    let cells = spec
        .capacities
        .iter()
        .map(|&capacity| {
            let cell: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.is_ok() && r.target_capacity == capacity)
                .collect();
            let n = cell.len().max(1) as f64;
            CellStats {
                capacity,
                instances: cell.len(),
                mean_expansions_stoch: cell
                    .iter()
                    .map(|r| r.expansions_stoch.unwrap() as f64)
                    .sum::<f64>()
                    / n,
                mean_expansions_det: cell
                    .iter()
                    .map(|r| r.expansions_det.unwrap() as f64)
                    .sum::<f64>()
                    / n,
                mean_dominations: cell
                    .iter()
                    .map(|r| r.dominations.unwrap() as f64)
                    .sum::<f64>()
                    / n,
                mean_improvement: cell.iter().map(|r| r.improvement.unwrap()).sum::<f64>() / n,
            }
        })
        .collect();

    BenchSummary {
        total: rows.len(),
        failed,
        over_capacity,
        strictly_improved,
        strict_improvement_fraction: if over_capacity > 0 {
            strictly_improved as f64 / over_capacity as f64
        } else {
            0.0
        },
        mean_improvement_among_improved: if strictly_improved > 0 {
            improvement_sum / strictly_improved as f64
        } else {
            0.0
        },
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> BenchSpec {
        BenchSpec {
            orders: (3, 4),
            capacities: vec![0.95, 1.10],
            per_cell: 2,
            seed: 11,
            ..BenchSpec::default()
        }
    }

    #[test]
    fn produces_one_row_per_instance_in_seed_order() {
        let (rows, summary) = run_bench(&tiny_spec());
        assert_eq!(rows.len(), 4);
        assert_eq!(summary.total, 4);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.seed, 11 + i as u64);
        }
    }

    #[test]
    fn stochastic_cost_never_exceeds_the_deterministic_evaluation() {
        let (rows, _) = run_bench(&tiny_spec());
        for row in rows.iter().filter(|r| r.is_ok()) {
            assert!(row.e_stoch.unwrap() <= row.e_det_eval.unwrap());
            assert!(row.improvement.unwrap() >= 0.0);
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_runs_agree() {
        let spec = tiny_spec();
        let (seq, _) = run_bench_with(&spec, Parallelism::Sequential);
        let (par, _) = run_bench_with(&spec, Parallelism::Auto);
        assert_eq!(seq.len(), par.len());
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.status, b.status);
            assert_eq!(a.e_stoch, b.e_stoch);
            assert_eq!(a.e_det_eval, b.e_det_eval);
            assert_eq!(a.expansions_stoch, b.expansions_stoch);
        }
    }
}
