//! Problem instances, factory states, the three operator schemata with their
//! applicability restrictions, and path-cost transitions.
//!
//! A state is the current inventory, the machine setup, and the set of
//! shipped orders. Operators are deliberately restricted to keep branching
//! linear in the number of products without losing any optimal schedule:
//! ship only with exactly the ordered amount in inventory, make only the
//! minimum quantity enabling a new ship, and change setup only on empty
//! inventory and never twice in a row.

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::rc::Rc;

/// Shipped flags are tracked in a 64-bit mask.
pub const MAX_ORDERS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub id: String,
    /// Mean processing time for one unit, minutes.
    pub run_mean: f64,
    pub run_std: f64,
    /// Sequence-independent setup time, minutes.
    pub setup_mean: f64,
    pub setup_std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Order {
    pub id: String,
    /// Index into the problem's product list.
    pub product: usize,
    pub quantity: u32,
    pub deadline: f64,
    /// Penalty incurred in full if the order ships after its deadline.
    pub weight: f64,
}

/// An immutable scheduling instance.
#[derive(Clone, Debug)]
pub struct Problem {
    products: Vec<Product>,
    orders: Vec<Order>,
    initial_setup: usize,
    initial_inventory: Vec<u32>,
    allow_initial_setup: bool,
    grid_step: f64,
}

impl Problem {
    pub(crate) fn from_parts(
        products: Vec<Product>,
        orders: Vec<OrderSpec>,
        initial_setup: &str,
        initial_inventory: &[(String, u32)],
        allow_initial_setup: bool,
        grid_step: f64,
    ) -> Result<Self> {
        if products.is_empty() {
            return Err(Error::InvalidProblem("products: list is empty".into()));
        }
        if !grid_step.is_finite() || grid_step <= 0.0 {
            return Err(Error::InvalidProblem(format!(
                "grid_step: must be positive, got {grid_step}"
            )));
        }
        let mut index_of = HashMap::new();
        for (i, p) in products.iter().enumerate() {
            if index_of.insert(p.id.clone(), i).is_some() {
                return Err(Error::InvalidProblem(format!(
                    "products: duplicate id `{}`",
                    p.id
                )));
            }
            if !p.run_mean.is_finite() || p.run_mean <= 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "products[{}].run_mean: must be positive",
                    p.id
                )));
            }
            for (field, v) in [
                ("run_std", p.run_std),
                ("setup_mean", p.setup_mean),
                ("setup_std", p.setup_std),
            ] {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidProblem(format!(
                        "products[{}].{field}: must be nonnegative",
                        p.id
                    )));
                }
            }
            if p.setup_mean == 0.0 && p.setup_std > 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "products[{}].setup_std: must be zero when setup_mean is zero",
                    p.id
                )));
            }
        }

        if orders.len() > MAX_ORDERS {
            return Err(Error::InvalidProblem(format!(
                "orders: at most {MAX_ORDERS} orders supported, got {}",
                orders.len()
            )));
        }
        let mut order_ids = HashMap::new();
        let mut resolved = Vec::with_capacity(orders.len());
        for (j, o) in orders.into_iter().enumerate() {
            if order_ids.insert(o.id.clone(), j).is_some() {
                return Err(Error::InvalidProblem(format!(
                    "orders: duplicate id `{}`",
                    o.id
                )));
            }
            let product = *index_of
                .get(&o.product)
                .ok_or_else(|| Error::UnknownProduct(o.product.clone()))?;
            if o.quantity < 1 {
                return Err(Error::InvalidProblem(format!(
                    "orders[{}].quantity: must be at least 1",
                    o.id
                )));
            }
            if !o.deadline.is_finite() || o.deadline < 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "orders[{}].deadline: must be nonnegative",
                    o.id
                )));
            }
            if !o.weight.is_finite() || o.weight < 0.0 {
                return Err(Error::InvalidProblem(format!(
                    "orders[{}].weight: must be nonnegative",
                    o.id
                )));
            }
            resolved.push(Order {
                id: o.id,
                product,
                quantity: o.quantity,
                deadline: o.deadline,
                weight: o.weight,
            });
        }

        let initial_setup = *index_of
            .get(initial_setup)
            .ok_or_else(|| Error::UnknownProduct(initial_setup.to_string()))?;
        let mut inventory = vec![0u32; products.len()];
        for (id, units) in initial_inventory {
            let i = *index_of
                .get(id)
                .ok_or_else(|| Error::UnknownProduct(id.clone()))?;
            inventory[i] = *units;
        }

        Ok(Problem {
            products,
            orders: resolved,
            initial_setup,
            initial_inventory: inventory,
            allow_initial_setup,
            grid_step,
        })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn initial_setup(&self) -> usize {
        self.initial_setup
    }

    pub fn initial_inventory(&self) -> &[u32] {
        &self.initial_inventory
    }

    pub fn allow_initial_setup(&self) -> bool {
        self.allow_initial_setup
    }

    pub fn product_index(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p.id == id)
    }

    pub fn order_index(&self, id: &str) -> Option<usize> {
        self.orders.iter().position(|o| o.id == id)
    }

    /// Sum of all order weights; an upper bound on any expected penalty.
    pub fn total_weight(&self) -> f64 {
        self.orders.iter().map(|o| o.weight).sum()
    }

    /// The same instance on a different grid.
    pub fn with_grid_step(&self, grid_step: f64) -> Result<Self> {
        if !grid_step.is_finite() || grid_step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid step must be positive, got {grid_step}"
            )));
        }
        let mut p = self.clone();
        p.grid_step = grid_step;
        Ok(p)
    }

    /// Processing-time law for a single unit of `product`.
    pub fn unit_run_law(&self, product: usize) -> DiscreteDistribution {
        let p = &self.products[product];
        DiscreteDistribution::truncated_normal(p.run_mean, p.run_std, self.grid_step)
            .expect("validated product parameters")
    }

    /// Setup-time law for `product`.
    pub fn setup_law(&self, product: usize) -> DiscreteDistribution {
        let p = &self.products[product];
        if p.setup_mean == 0.0 {
            // Validation guarantees zero std here.
            return DiscreteDistribution::point_mass(0.0, self.grid_step)
                .expect("validated grid step");
        }
        DiscreteDistribution::truncated_normal(p.setup_mean, p.setup_std, self.grid_step)
            .expect("validated product parameters")
    }

    /// The same instance with every law collapsed to a point mass at its
    /// mean.
    pub(crate) fn with_deterministic_times(&self) -> Problem {
        let mut det = self.clone();
        for p in &mut det.products {
            p.run_std = 0.0;
            p.setup_std = 0.0;
        }
        det
    }

    /// Time law for producing `quantity` units of `product`: the q-fold
    /// convolution of the unit law (units are independent and identically
    /// distributed).
    pub fn make_time(&self, product: usize, quantity: u32) -> Result<DiscreteDistribution> {
        if product >= self.products.len() {
            return Err(Error::UnknownProduct(format!("#{product}")));
        }
        if quantity < 1 {
            return Err(Error::InvalidParameter(format!(
                "make quantity must be at least 1, got {quantity}"
            )));
        }
        Ok(pow_convolve(&self.unit_run_law(product), quantity))
    }

    pub fn initial_state(&self) -> State {
        State {
            inventory: self.initial_inventory.clone(),
            setup: self.initial_setup,
            shipped: 0,
            just_set_up: false,
        }
    }

    fn full_shipped_mask(&self) -> u64 {
        if self.orders.len() == MAX_ORDERS {
            u64::MAX
        } else {
            (1u64 << self.orders.len()) - 1
        }
    }

    pub fn is_goal(&self, state: &State) -> bool {
        state.shipped == self.full_shipped_mask()
    }

    fn is_initial_state(&self, state: &State) -> bool {
        state.shipped == 0
            && !state.just_set_up
            && state.setup == self.initial_setup
            && state.inventory == self.initial_inventory
    }

    /// All operators generated in `state`, in canonical order: ships (earlier
    /// deadline first, then input order), the single minimum-quantity make,
    /// then setups in product order.
    pub fn applicable_operators(&self, state: &State) -> Vec<Operator> {
        let mut ops = Vec::new();

        let mut ships: Vec<usize> = (0..self.orders.len())
            .filter(|&j| {
                !state.is_shipped(j)
                    && state.inventory[self.orders[j].product] == self.orders[j].quantity
            })
            .collect();
        ships.sort_by(|&a, &b| self.orders[a].deadline.total_cmp(&self.orders[b].deadline));
        ops.extend(ships.into_iter().map(|order| Operator::Ship { order }));

        // Only the set-up product can be made, and only the smallest quantity
        // that enables a new ship.
        let current = state.setup;
        let q_star = self
            .orders
            .iter()
            .enumerate()
            .filter(|(j, o)| {
                !state.is_shipped(*j)
                    && o.product == current
                    && o.quantity > state.inventory[current]
            })
            .map(|(_, o)| o.quantity - state.inventory[current])
            .min();
        if let Some(quantity) = q_star {
            ops.push(Operator::Make {
                product: current,
                quantity,
            });
        }

        let initial_setup_suppressed = !self.allow_initial_setup && self.is_initial_state(state);
        if state.total_inventory() == 0 && !state.just_set_up && !initial_setup_suppressed {
            for i in 0..self.products.len() {
                if i == current {
                    continue;
                }
                let demanded = self
                    .orders
                    .iter()
                    .enumerate()
                    .any(|(j, o)| !state.is_shipped(j) && o.product == i);
                if demanded {
                    ops.push(Operator::Setup { product: i });
                }
            }
        }
        ops
    }

    /// Apply `op`, checking that it is generated in `state`.
    pub fn apply(&self, state: &State, op: Operator) -> Result<State> {
        if !self.applicable_operators(state).contains(&op) {
            return Err(Error::Inapplicable {
                op: op.describe(self),
                reason: format!("state {state:?}"),
            });
        }
        Ok(self.apply_unchecked(state, op))
    }

    pub(crate) fn apply_unchecked(&self, state: &State, op: Operator) -> State {
        let mut next = state.clone();
        match op {
            Operator::Make { product, quantity } => {
                next.inventory[product] += quantity;
                next.just_set_up = false;
            }
            Operator::Setup { product } => {
                next.setup = product;
                next.just_set_up = true;
            }
            Operator::Ship { order } => {
                let o = &self.orders[order];
                next.inventory[o.product] -= o.quantity;
                next.shipped |= 1u64 << order;
                next.just_set_up = false;
            }
        }
        next
    }

    /// Cost of extending a path by one operator: make and setup convolve
    /// their time law into the path's completion-time distribution; ship
    /// accrues the order's weight times its lateness probability.
    pub fn transition_cost(&self, cost: &PathCost, op: Operator) -> PathCost {
        match op {
            Operator::Make { product, quantity } => {
                let law = self.make_time(product, quantity).expect("valid operator");
                PathCost {
                    expected_penalty: cost.expected_penalty,
                    time: cost.time.convolve(&law).expect("laws share the grid"),
                }
            }
            Operator::Setup { product } => PathCost {
                expected_penalty: cost.expected_penalty,
                time: cost
                    .time
                    .convolve(&self.setup_law(product))
                    .expect("laws share the grid"),
            },
            Operator::Ship { order } => {
                let o = &self.orders[order];
                PathCost {
                    expected_penalty: cost.expected_penalty
                        + o.weight * cost.time.prob_greater(o.deadline),
                    time: cost.time.clone(),
                }
            }
        }
    }

    /// Replay an operator sequence from the initial state, checking
    /// applicability at every step.
    pub fn replay(&self, operators: &[Operator]) -> Result<Replay> {
        let mut state = self.initial_state();
        let mut cost = PathCost::initial(self);
        let mut per_order = Vec::new();
        for (step, &op) in operators.iter().enumerate() {
            if !self.applicable_operators(&state).contains(&op) {
                return Err(Error::InvalidSchedule(format!(
                    "operator {} ({}) not applicable at step {step}",
                    op.describe(self),
                    step
                )));
            }
            if let Operator::Ship { order } = op {
                let o = &self.orders[order];
                per_order.push(ShipOutcome {
                    order,
                    late_prob: cost.time.prob_greater(o.deadline),
                    ship_time: cost.time.clone(),
                });
            }
            cost = self.transition_cost(&cost, op);
            state = self.apply_unchecked(&state, op);
        }
        Ok(Replay {
            cost,
            per_order,
            final_state: state,
        })
    }
}

/// Order fields as given in input, before product-id resolution.
#[derive(Clone, Debug)]
pub struct OrderSpec {
    pub id: String,
    pub product: String,
    pub quantity: u32,
    pub deadline: f64,
    pub weight: f64,
}

/// Inventory, machine setup, and shipped flags. `just_set_up` marks states
/// reached by a setup operator, enforcing that setups never repeat
/// back-to-back; it is part of the state identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    inventory: Vec<u32>,
    setup: usize,
    shipped: u64,
    just_set_up: bool,
}

impl State {
    pub fn inventory(&self) -> &[u32] {
        &self.inventory
    }

    pub fn setup(&self) -> usize {
        self.setup
    }

    pub fn shipped_mask(&self) -> u64 {
        self.shipped
    }

    pub fn is_shipped(&self, order: usize) -> bool {
        self.shipped & (1u64 << order) != 0
    }

    pub fn just_set_up(&self) -> bool {
        self.just_set_up
    }

    pub fn total_inventory(&self) -> u32 {
        self.inventory.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Make { product: usize, quantity: u32 },
    Setup { product: usize },
    Ship { order: usize },
}

impl Operator {
    /// Compact human-readable label, e.g. `make:X:11`, `setup:Y`, `ship:R1`.
    pub fn describe(&self, problem: &Problem) -> String {
        match *self {
            Operator::Make { product, quantity } => {
                format!("make:{}:{}", problem.products()[product].id, quantity)
            }
            Operator::Setup { product } => format!("setup:{}", problem.products()[product].id),
            Operator::Ship { order } => format!("ship:{}", problem.orders()[order].id),
        }
    }
}

/// Two-component path cost: accrued expected penalty and the distribution of
/// elapsed time.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCost {
    pub expected_penalty: f64,
    pub time: DiscreteDistribution,
}

impl PathCost {
    pub fn initial(problem: &Problem) -> Self {
        PathCost {
            expected_penalty: 0.0,
            time: DiscreteDistribution::point_mass(0.0, problem.grid_step())
                .expect("validated grid step"),
        }
    }
}

/// Ship-time law and lateness probability recorded when an order ships.
#[derive(Clone, Debug)]
pub struct ShipOutcome {
    pub order: usize,
    pub ship_time: DiscreteDistribution,
    pub late_prob: f64,
}

/// Result of replaying an operator sequence.
#[derive(Clone, Debug)]
pub struct Replay {
    pub cost: PathCost,
    pub per_order: Vec<ShipOutcome>,
    pub final_state: State,
}

/// An operator sequence from the initial state to a goal state, with its
/// evaluated cost and per-order outcomes.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub operators: Vec<Operator>,
    pub cost: PathCost,
    pub per_order: Vec<ShipOutcome>,
}

impl Schedule {
    pub fn describe(&self, problem: &Problem) -> String {
        self.operators
            .iter()
            .map(|op| op.describe(problem))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn pow_convolve(law: &DiscreteDistribution, n: u32) -> DiscreteDistribution {
    debug_assert!(n >= 1);
    let mut result: Option<DiscreteDistribution> = None;
    let mut base = law.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.convolve(&base).expect("laws share the grid"),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.convolve(&base).expect("laws share the grid");
    }
    result.expect("n >= 1")
}

/// A distribution with precomputed suffix sums for O(|f|) tail queries on
/// sums `f + law`.
pub(crate) struct CachedLaw {
    pub law: DiscreteDistribution,
    suffix: Vec<f64>,
}

impl CachedLaw {
    fn new(law: DiscreteDistribution) -> Rc<Self> {
        let suffix = law.suffix_sums();
        Rc::new(CachedLaw { law, suffix })
    }

    /// `P(f + law > d)`.
    pub fn tail_of_sum(&self, f: &DiscreteDistribution, d: f64) -> f64 {
        crate::dist::tail_of_sum(f, &self.law, &self.suffix, d)
    }
}

/// Per-solve memo of make/setup laws. Laws depend only on the problem, so
/// reuse across nodes is exact.
pub(crate) struct LawCache<'p> {
    problem: &'p Problem,
    setup: Vec<Option<Rc<CachedLaw>>>,
    make: HashMap<(usize, u32), Rc<CachedLaw>>,
    make_then_setup: HashMap<(usize, u32), Rc<CachedLaw>>,
}

impl<'p> LawCache<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        LawCache {
            problem,
            setup: vec![None; problem.products().len()],
            make: HashMap::new(),
            make_then_setup: HashMap::new(),
        }
    }

    pub fn setup_law(&mut self, product: usize) -> Rc<CachedLaw> {
        if self.setup[product].is_none() {
            self.setup[product] = Some(CachedLaw::new(self.problem.setup_law(product)));
        }
        self.setup[product].as_ref().unwrap().clone()
    }

    pub fn make_law(&mut self, product: usize, quantity: u32) -> Rc<CachedLaw> {
        if let Some(law) = self.make.get(&(product, quantity)) {
            return law.clone();
        }
        let law = CachedLaw::new(
            self.problem
                .make_time(product, quantity)
                .expect("valid make operator"),
        );
        self.make.insert((product, quantity), law.clone());
        law
    }

    /// Combined law for producing `quantity` units after a setup change.
    pub fn make_then_setup_law(&mut self, product: usize, quantity: u32) -> Rc<CachedLaw> {
        if let Some(law) = self.make_then_setup.get(&(product, quantity)) {
            return law.clone();
        }
        let make = self.make_law(product, quantity);
        let setup = self.setup_law(product);
        let law = CachedLaw::new(make.law.convolve(&setup.law).expect("laws share the grid"));
        self.make_then_setup.insert((product, quantity), law.clone());
        law
    }

    /// Same transition as [`Problem::transition_cost`], reusing cached laws.
    pub fn transition(&mut self, cost: &PathCost, op: Operator) -> PathCost {
        match op {
            Operator::Make { product, quantity } => {
                let law = self.make_law(product, quantity);
                PathCost {
                    expected_penalty: cost.expected_penalty,
                    time: cost.time.convolve(&law.law).expect("laws share the grid"),
                }
            }
            Operator::Setup { product } => {
                let law = self.setup_law(product);
                PathCost {
                    expected_penalty: cost.expected_penalty,
                    time: cost.time.convolve(&law.law).expect("laws share the grid"),
                }
            }
            Operator::Ship { order } => {
                let o = &self.problem.orders()[order];
                PathCost {
                    expected_penalty: cost.expected_penalty
                        + o.weight * cost.time.prob_greater(o.deadline),
                    time: cost.time.clone(),
                }
            }
        }
    }
}
