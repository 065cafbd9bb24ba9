//! Serializable document types for problem and schedule files.
//!
//! Problems are a single JSON document with times in minutes as decimal
//! numbers; schedules mirror the operator list with explicit make/setup/ship
//! records so they can be re-evaluated or simulated without re-solving.

use crate::error::Result;
use crate::model::{Operator, OrderSpec, Problem, Product, Schedule};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductDoc {
    pub id: String,
    pub run_mean: f64,
    #[serde(default)]
    pub run_std: f64,
    pub setup_mean: f64,
    #[serde(default)]
    pub setup_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderDoc {
    pub id: String,
    pub product: String,
    pub quantity: u32,
    pub deadline: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

fn default_allow_initial_setup() -> bool {
    true
}

fn default_grid_step() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub products: Vec<ProductDoc>,
    pub orders: Vec<OrderDoc>,
    pub initial_setup: String,
    #[serde(default)]
    pub initial_inventory: BTreeMap<String, u32>,
    #[serde(default = "default_allow_initial_setup")]
    pub allow_initial_setup: bool,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
}

impl ProblemDoc {
    pub fn to_problem(&self) -> Result<Problem> {
        let products = self
            .products
            .iter()
            .map(|p| Product {
                id: p.id.clone(),
                run_mean: p.run_mean,
                run_std: p.run_std,
                setup_mean: p.setup_mean,
                setup_std: p.setup_std,
            })
            .collect();
        let orders = self
            .orders
            .iter()
            .map(|o| OrderSpec {
                id: o.id.clone(),
                product: o.product.clone(),
                quantity: o.quantity,
                deadline: o.deadline,
                weight: o.weight,
            })
            .collect();
        let inventory: Vec<(String, u32)> = self
            .initial_inventory
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Problem::from_parts(
            products,
            orders,
            &self.initial_setup,
            &inventory,
            self.allow_initial_setup,
            self.grid_step,
        )
    }

    pub fn from_problem(problem: &Problem) -> ProblemDoc {
        ProblemDoc {
            products: problem
                .products()
                .iter()
                .map(|p| ProductDoc {
                    id: p.id.clone(),
                    run_mean: p.run_mean,
                    run_std: p.run_std,
                    setup_mean: p.setup_mean,
                    setup_std: p.setup_std,
                })
                .collect(),
            orders: problem
                .orders()
                .iter()
                .map(|o| OrderDoc {
                    id: o.id.clone(),
                    product: problem.products()[o.product].id.clone(),
                    quantity: o.quantity,
                    deadline: o.deadline,
                    weight: o.weight,
                })
                .collect(),
            initial_setup: problem.products()[problem.initial_setup()].id.clone(),
            initial_inventory: problem
                .initial_inventory()
                .iter()
                .enumerate()
                .filter(|(_, &units)| units > 0)
                .map(|(i, &units)| (problem.products()[i].id.clone(), units))
                .collect(),
            allow_initial_setup: problem.allow_initial_setup(),
            grid_step: problem.grid_step(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum OperatorDoc {
    Make { product: String, quantity: u32 },
    Setup { product: String },
    Ship { order: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerOrderDoc {
    pub order: String,
    pub late_prob: f64,
    pub ship_time_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub operators: Vec<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_order: Option<Vec<PerOrderDoc>>,
}

impl ScheduleDoc {
    /// Resolve ids against `problem`.
    pub fn to_operators(&self, problem: &Problem) -> Result<Vec<Operator>> {
        self.operators
            .iter()
            .map(|doc| match doc {
                OperatorDoc::Make { product, quantity } => problem
                    .product_index(product)
                    .map(|product| Operator::Make {
                        product,
                        quantity: *quantity,
                    })
                    .ok_or_else(|| crate::Error::UnknownProduct(product.clone())),
                OperatorDoc::Setup { product } => problem
                    .product_index(product)
                    .map(|product| Operator::Setup { product })
                    .ok_or_else(|| crate::Error::UnknownProduct(product.clone())),
                OperatorDoc::Ship { order } => problem
                    .order_index(order)
                    .map(|order| Operator::Ship { order })
                    .ok_or_else(|| crate::Error::UnknownOrder(order.clone())),
            })
            .collect()
    }

    pub fn from_schedule(schedule: &Schedule, problem: &Problem) -> ScheduleDoc {
        let operators = schedule
            .operators
            .iter()
            .map(|op| match *op {
                Operator::Make { product, quantity } => OperatorDoc::Make {
                    product: problem.products()[product].id.clone(),
                    quantity,
                },
                Operator::Setup { product } => OperatorDoc::Setup {
                    product: problem.products()[product].id.clone(),
                },
                Operator::Ship { order } => OperatorDoc::Ship {
                    order: problem.orders()[order].id.clone(),
                },
            })
            .collect();
        ScheduleDoc {
            operators,
            expected_penalty: Some(schedule.cost.expected_penalty),
            completion_mean: Some(schedule.cost.time.mean()),
            per_order: Some(
                schedule
                    .per_order
                    .iter()
                    .map(|s| PerOrderDoc {
                        order: problem.orders()[s.order].id.clone(),
                        late_prob: s.late_prob,
                        ship_time_mean: s.ship_time.mean(),
                    })
                    .collect(),
            ),
        }
    }
}
