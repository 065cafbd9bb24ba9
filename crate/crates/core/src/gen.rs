//! Built-in example instances and a seeded random-instance generator
//! calibrated to a target capacity ratio.

use crate::error::{Error, Result};
use crate::fileio::{OrderDoc, ProblemDoc, ProductDoc};
use crate::model::{Operator, Problem, Product};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// The six-product Nova production environment used by the random
/// benchmark instances (per-unit run times and sequence-independent setups,
/// in minutes).
pub fn nova_products() -> Vec<Product> {
    let data: [(f64, f64, f64, f64); 6] = [
        (2.9, 0.2, 5.0, 0.1),
        (3.1, 0.2, 5.0, 0.1),
        (3.1, 0.2, 12.0, 0.1),
        (3.4, 0.3, 15.0, 0.2),
        (3.7, 0.3, 15.0, 0.2),
        (4.0, 0.4, 15.0, 0.2),
    ];
    data.iter()
        .enumerate()
        .map(|(i, &(run_mean, run_std, setup_mean, setup_std))| Product {
            id: format!("P{}", i + 1),
            run_mean,
            run_std,
            setup_mean,
            setup_std,
        })
        .collect()
}

fn example_products() -> Vec<ProductDoc> {
    vec![
        ProductDoc {
            id: "X".into(),
            run_mean: 20.0,
            run_std: 2.0,
            setup_mean: 5.0,
            setup_std: 0.0,
        },
        ProductDoc {
            id: "Y".into(),
            run_mean: 30.0,
            run_std: 2.0,
            setup_mean: 10.0,
            setup_std: 0.0,
        },
        ProductDoc {
            id: "Z".into(),
            run_mean: 25.0,
            run_std: 2.0,
            setup_mean: 5.0,
            setup_std: 0.0,
        },
    ]
}

fn order_doc(id: &str, product: &str, quantity: u32, deadline: f64, weight: f64) -> OrderDoc {
    OrderDoc {
        id: id.into(),
        product: product.into(),
        quantity,
        deadline,
        weight,
    }
}

/// Two orders due at the end of one 480-minute day: 11 units of X (weight
/// `w1`) and 8 of Y (weight `w2`), machine initially set up for X.
pub fn example_two_orders(w1: f64, w2: f64) -> Problem {
    ProblemDoc {
        products: example_products(),
        orders: vec![
            order_doc("R1", "X", 11, 480.0, w1),
            order_doc("R2", "Y", 8, 480.0, w2),
        ],
        initial_setup: "X".into(),
        initial_inventory: BTreeMap::new(),
        allow_initial_setup: true,
        grid_step: 0.25,
    }
    .to_problem()
    .expect("built-in instance is valid")
}

/// [`example_two_orders`] plus a third order for 19 units of Z due at the
/// end of day two (minute 960).
pub fn example_three_orders(w1: f64, w2: f64, w3: f64) -> Problem {
    ProblemDoc {
        products: example_products(),
        orders: vec![
            order_doc("R1", "X", 11, 480.0, w1),
            order_doc("R2", "Y", 8, 480.0, w2),
            order_doc("R3", "Z", 19, 960.0, w3),
        ],
        initial_setup: "X".into(),
        initial_inventory: BTreeMap::new(),
        allow_initial_setup: true,
        grid_step: 0.25,
    }
    .to_problem()
    .expect("built-in instance is valid")
}

/// Four orders over two products with overlapping quantities (6 and 4 of X,
/// 2 and 6 of Y), illustrating the exact-quantity ship restriction.
pub fn example_four_orders() -> Problem {
    ProblemDoc {
        products: example_products(),
        orders: vec![
            order_doc("R4", "X", 6, 480.0, 1.0),
            order_doc("R5", "X", 4, 480.0, 1.0),
            order_doc("R6", "Y", 2, 480.0, 1.0),
            order_doc("R7", "Y", 6, 480.0, 1.0),
        ],
        initial_setup: "X".into(),
        initial_inventory: BTreeMap::new(),
        allow_initial_setup: true,
        grid_step: 0.25,
    }
    .to_problem()
    .expect("built-in instance is valid")
}

/// Build R1 first, then R2: make 11 X, ship, set up Y, make 8 Y, ship.
pub fn x_first_schedule(problem: &Problem) -> Vec<Operator> {
    let x = problem.product_index("X").expect("example problem");
    let y = problem.product_index("Y").expect("example problem");
    vec![
        Operator::Make {
            product: x,
            quantity: 11,
        },
        Operator::Ship {
            order: problem.order_index("R1").expect("example problem"),
        },
        Operator::Setup { product: y },
        Operator::Make {
            product: y,
            quantity: 8,
        },
        Operator::Ship {
            order: problem.order_index("R2").expect("example problem"),
        },
    ]
}

/// Build R2 first, then R1: set up Y, make 8 Y, ship, set up X, make 11 X,
/// ship.
pub fn y_first_schedule(problem: &Problem) -> Vec<Operator> {
    let x = problem.product_index("X").expect("example problem");
    let y = problem.product_index("Y").expect("example problem");
    vec![
        Operator::Setup { product: y },
        Operator::Make {
            product: y,
            quantity: 8,
        },
        Operator::Ship {
            order: problem.order_index("R2").expect("example problem"),
        },
        Operator::Setup { product: x },
        Operator::Make {
            product: x,
            quantity: 11,
        },
        Operator::Ship {
            order: problem.order_index("R1").expect("example problem"),
        },
    ]
}

/// Extend a complete two-order schedule with the R3 tail: set up Z, make 19
/// Z, ship R3.
pub fn with_z_extension(problem: &Problem, mut operators: Vec<Operator>) -> Vec<Operator> {
    let z = problem.product_index("Z").expect("example problem");
    operators.push(Operator::Setup { product: z });
    operators.push(Operator::Make {
        product: z,
        quantity: 19,
    });
    operators.push(Operator::Ship {
        order: problem.order_index("R3").expect("example problem"),
    });
    operators
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightRule {
    /// Every order weighs 1.
    Unit,
    /// An order weighs its quantity.
    #[default]
    PerUnitQuantity,
}

impl std::str::FromStr for WeightRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unit" => Ok(WeightRule::Unit),
            "per-unit" | "per-unit-quantity" => Ok(WeightRule::PerUnitQuantity),
            other => Err(format!("unknown weight rule `{other}` (expected unit|per-unit)")),
        }
    }
}

/// Parameters for the random-instance generator. Deterministic given `seed`.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub n_orders: usize,
    /// Estimated load divided by horizon; calibrated within ±0.02.
    pub target_capacity: f64,
    /// Scheduling horizon in minutes; deadlines fall in its upper half.
    pub horizon: f64,
    pub quantity_range: (u32, u32),
    pub weight_rule: WeightRule,
    pub seed: u64,
    pub grid_step: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            n_orders: 8,
            target_capacity: 1.10,
            horizon: 480.0,
            quantity_range: (5, 25),
            weight_rule: WeightRule::default(),
            seed: 0,
            grid_step: 0.25,
        }
    }
}

/// Estimated load of an instance: expected run time of every ordered unit
/// plus one setup per distinct demanded product.
pub fn estimated_load(problem: &Problem) -> f64 {
    let run: f64 = problem
        .orders()
        .iter()
        .map(|o| o.quantity as f64 * problem.products()[o.product].run_mean)
        .sum();
    let mut demanded = vec![false; problem.products().len()];
    for o in problem.orders() {
        demanded[o.product] = true;
    }
    let setups: f64 = demanded
        .iter()
        .zip(problem.products())
        .filter(|(d, _)| **d)
        .map(|(_, p)| p.setup_mean)
        .sum();
    run + setups
}

const CAPACITY_WINDOW: f64 = 0.02;

/// Generate a Nova-product instance whose estimated load sits within ±0.02
/// of `target_capacity * horizon`. Quantities are drawn uniformly, rescaled,
/// then nudged unit by unit; deadlines are uniform over the upper half of
/// the horizon (clamped so each order can at least finish alone); the
/// machine starts set up for the first order's product and initial setups
/// are disallowed.
pub fn generate(spec: &GenSpec) -> Result<Problem> {
    if spec.n_orders < 1 {
        return Err(Error::Generation("n_orders must be at least 1".into()));
    }
    if !(spec.target_capacity > 0.0) || !(spec.horizon > 0.0) {
        return Err(Error::Generation(
            "target capacity and horizon must be positive".into(),
        ));
    }
    let (q_lo, q_hi) = spec.quantity_range;
    if q_lo < 1 || q_hi < q_lo {
        return Err(Error::Generation(format!(
            "invalid quantity range {q_lo}..={q_hi}"
        )));
    }

    let products = nova_products();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let assigned: Vec<usize> = (0..spec.n_orders)
        .map(|_| rng.gen_range(0..products.len()))
        .collect();
    let mut quantities: Vec<u32> = (0..spec.n_orders)
        .map(|_| rng.gen_range(q_lo..=q_hi))
        .collect();

    let setup_load: f64 = {
        let mut demanded = vec![false; products.len()];
        for &i in &assigned {
            demanded[i] = true;
        }
        demanded
            .iter()
            .zip(&products)
            .filter(|(d, _)| **d)
            .map(|(_, p)| p.setup_mean)
            .sum()
    };
    let target_load = spec.target_capacity * spec.horizon;
    let run_target = target_load - setup_load;
    if run_target <= 0.0 {
        return Err(Error::Generation(format!(
            "target load {target_load:.1} cannot cover {setup_load:.1} of setups"
        )));
    }

    // Coarse rescale to the target, then fine-tune one unit at a time.
    let run_load = |qs: &[u32]| -> f64 {
        qs.iter()
            .zip(&assigned)
            .map(|(&q, &i)| q as f64 * products[i].run_mean)
            .sum()
    };
    let scale = run_target / run_load(&quantities);
    for q in &mut quantities {
        *q = ((*q as f64 * scale).round() as u32).max(1);
    }

    let mut calibrated = false;
    for _ in 0..1000 {
        let ratio = (run_load(&quantities) + setup_load) / spec.horizon;
        let diff = ratio - spec.target_capacity;
        if diff.abs() <= CAPACITY_WINDOW {
            calibrated = true;
            break;
        }
        let j = rng.gen_range(0..spec.n_orders);
        if diff > 0.0 {
            if quantities[j] > 1 {
                quantities[j] -= 1;
            }
        } else {
            quantities[j] += 1;
        }
    }
    if !calibrated {
        return Err(Error::Generation(format!(
            "could not calibrate capacity to {:.2} ± {CAPACITY_WINDOW}",
            spec.target_capacity
        )));
    }

    let initial_setup = products[assigned[0]].id.clone();
    let snap = |x: f64| (x / spec.grid_step).round() * spec.grid_step;
    let snap_up = |x: f64| (x / spec.grid_step).ceil() * spec.grid_step;

    let mut orders = Vec::with_capacity(spec.n_orders);
    for (j, (&product_idx, &quantity)) in assigned.iter().zip(&quantities).enumerate() {
        let product = &products[product_idx];
        let drawn = snap(rng.gen_range(0.5 * spec.horizon..=spec.horizon));
        let solo = quantity as f64 * product.run_mean
            + if product.id == initial_setup {
                0.0
            } else {
                product.setup_mean
            };
        let deadline = drawn.max(snap_up(solo));
        let weight = match spec.weight_rule {
            WeightRule::Unit => 1.0,
            WeightRule::PerUnitQuantity => quantity as f64,
        };
        orders.push(OrderDoc {
            id: format!("O{}", j + 1),
            product: product.id.clone(),
            quantity,
            deadline,
            weight,
        });
    }

    ProblemDoc {
        products: products
            .iter()
            .map(|p| ProductDoc {
                id: p.id.clone(),
                run_mean: p.run_mean,
                run_std: p.run_std,
                setup_mean: p.setup_mean,
                setup_std: p.setup_std,
            })
            .collect(),
        orders,
        initial_setup,
        initial_inventory: BTreeMap::new(),
        allow_initial_setup: false,
        grid_step: spec.grid_step,
    }
    .to_problem()
}
