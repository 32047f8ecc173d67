//! Bids, scenarios and allocation matrices shared by every mechanism.
//!
//! A [`Scenario`] holds one auction round: `m` task bids (buyers), `n`
//! device bids (sellers), the number of resource types `k`, and the two
//! distribution-cost coefficients. Scenarios are read from and written to
//! a small JSON format; [`save_scenario`] produces canonical output (sorted
//! keys, shortest round-trip float formatting) so files diff cleanly.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::PriceMatrix;

/// Absolute tolerance for every quantity and money comparison.
pub const EPS: f64 = 1e-9;

const REFERENCE_FIXTURE: &str = include_str!("../fixtures/reference.json");

/// A buyer: a divisible task asking for `demand[t]` units of each resource type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBid {
    pub id: String,
    pub demand: Vec<f64>,
    pub valuation: f64,
}

/// A seller: each assignment delivers one `supply` bundle at `cost`,
/// at most `capacity` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBid {
    pub id: String,
    pub supply: Vec<f64>,
    pub capacity: u32,
    pub cost: f64,
}

impl DeviceBid {
    /// Units in one bundle, summed over resource types.
    pub fn bundle_units(&self) -> f64 {
        self.supply.iter().sum()
    }
}

impl TaskBid {
    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub resource_types: usize,
    pub alpha: f64,
    pub beta: f64,
    pub tasks: Vec<TaskBid>,
    pub devices: Vec<DeviceBid>,
}

/// One broken scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoTasks,
    NoDevices,
    NoResourceTypes,
    DuplicateId(String),
    LengthMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    NegativeQuantity(String),
    NonFinite(String),
    AllZeroDemand(String),
    AllZeroSupply(String),
    NonPositiveValuation(String),
    NonPositiveCost(String),
    ZeroCapacity(String),
    NegativeCoefficient(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTasks => write!(f, "at least one task required"),
            Violation::NoDevices => write!(f, "at least one device required"),
            Violation::NoResourceTypes => write!(f, "resource_types must be at least 1"),
            Violation::DuplicateId(id) => write!(f, "duplicate id {id}"),
            Violation::LengthMismatch {
                id,
                expected,
                found,
            } => write!(
                f,
                "vector length mismatch for {id}: {found} entries, expected {expected}"
            ),
            Violation::NegativeQuantity(id) => write!(f, "negative quantity in {id}"),
            Violation::NonFinite(id) => write!(f, "non-finite number in {id}"),
            Violation::AllZeroDemand(id) => write!(f, "all-zero demand for {id}"),
            Violation::AllZeroSupply(id) => write!(f, "all-zero supply for {id}"),
            Violation::NonPositiveValuation(id) => write!(f, "valuation of {id} must be > 0"),
            Violation::NonPositiveCost(id) => write!(f, "cost of {id} must be > 0"),
            Violation::ZeroCapacity(id) => write!(f, "capacity of {id} must be >= 1"),
            Violation::NegativeCoefficient(name) => write!(f, "{name} must be >= 0"),
        }
    }
}

impl Scenario {
    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_devices(&self) -> usize {
        self.devices.len()
    }

    /// Checks every bid and scenario invariant, reporting all violations
    /// rather than stopping at the first.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let k = self.resource_types;
        if k == 0 {
            out.push(Violation::NoResourceTypes);
        }
        if self.tasks.is_empty() {
            out.push(Violation::NoTasks);
        }
        if self.devices.is_empty() {
            out.push(Violation::NoDevices);
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !value.is_finite() || value < 0.0 {
                out.push(Violation::NegativeCoefficient(name));
            }
        }

        let mut seen = HashSet::new();
        for t in &self.tasks {
            if !seen.insert(t.id.as_str()) {
                out.push(Violation::DuplicateId(t.id.clone()));
            }
            check_vector(&t.id, &t.demand, k, &mut out, Violation::AllZeroDemand);
            if !t.valuation.is_finite() {
                out.push(Violation::NonFinite(t.id.clone()));
            } else if t.valuation <= 0.0 {
                out.push(Violation::NonPositiveValuation(t.id.clone()));
            }
        }

        let mut seen = HashSet::new();
        for d in &self.devices {
            if !seen.insert(d.id.as_str()) {
                out.push(Violation::DuplicateId(d.id.clone()));
            }
            check_vector(&d.id, &d.supply, k, &mut out, Violation::AllZeroSupply);
            if d.capacity == 0 {
                out.push(Violation::ZeroCapacity(d.id.clone()));
            }
            if !d.cost.is_finite() {
                out.push(Violation::NonFinite(d.id.clone()));
            } else if d.cost <= 0.0 {
                out.push(Violation::NonPositiveCost(d.id.clone()));
            }
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn device_index(&self, id: &str) -> Option<usize> {
        self.devices.iter().position(|d| d.id == id)
    }
}

fn check_vector(
    id: &str,
    values: &[f64],
    k: usize,
    out: &mut Vec<Violation>,
    all_zero: fn(String) -> Violation,
) {
    if values.len() != k {
        out.push(Violation::LengthMismatch {
            id: id.to_string(),
            expected: k,
            found: values.len(),
        });
    }
    if values.iter().any(|x| !x.is_finite()) {
        out.push(Violation::NonFinite(id.to_string()));
        return;
    }
    if values.iter().any(|&x| x < 0.0) {
        out.push(Violation::NegativeQuantity(id.to_string()));
    }
    if !values.iter().any(|&x| x > 0.0) {
        out.push(all_zero(id.to_string()));
    }
}

/// Parses and validates a scenario from its JSON text.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate().map_err(Error::Invalid)?;
    Ok(scenario)
}

/// Canonical JSON: sorted keys, two-space indent, shortest round-trip floats.
pub fn save_scenario(scenario: &Scenario) -> Result<String> {
    scenario.validate().map_err(Error::Invalid)?;
    let value = serde_json::to_value(scenario).map_err(|e| Error::Io(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// The six-task, five-device reference instance shipped in `fixtures/reference.json`.
pub fn reference_scenario() -> Scenario {
    load_scenario(REFERENCE_FIXTURE).expect("bundled fixture is valid")
}

/// Binary task × device assignment matrix plus the set of winning tasks.
///
/// Winning devices are not stored: a device wins iff its column is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrix {
    tasks: usize,
    devices: usize,
    cells: Vec<bool>,
    task_won: Vec<bool>,
}

impl AllocationMatrix {
    pub fn new(tasks: usize, devices: usize) -> Self {
        Self {
            tasks,
            devices,
            cells: vec![false; tasks * devices],
            task_won: vec![false; tasks],
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks
    }

    pub fn num_devices(&self) -> usize {
        self.devices
    }

    pub fn get(&self, task: usize, device: usize) -> bool {
        self.cells[task * self.devices + device]
    }

    pub fn set(&mut self, task: usize, device: usize, value: bool) {
        self.cells[task * self.devices + device] = value;
    }

    pub fn set_winner(&mut self, task: usize, won: bool) {
        self.task_won[task] = won;
    }

    pub fn is_winner(&self, task: usize) -> bool {
        self.task_won[task]
    }

    /// Zeroes a row and marks the task as losing.
    pub fn clear_row(&mut self, task: usize) {
        let n = self.devices;
        self.cells[task * n..(task + 1) * n].fill(false);
        self.task_won[task] = false;
    }

    /// Devices assigned to `task`, ascending by index.
    pub fn row(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.devices;
        self.cells[task * n..(task + 1) * n]
            .iter()
            .enumerate()
            .filter_map(|(j, &x)| x.then_some(j))
    }

    pub fn row_sum(&self, task: usize) -> usize {
        self.row(task).count()
    }

    pub fn column_sum(&self, device: usize) -> usize {
        (0..self.tasks).filter(|&i| self.get(i, device)).count()
    }

    pub fn winning_tasks(&self) -> Vec<usize> {
        (0..self.tasks).filter(|&i| self.task_won[i]).collect()
    }

    pub fn winning_devices(&self) -> Vec<usize> {
        (0..self.devices)
            .filter(|&j| self.column_sum(j) > 0)
            .collect()
    }

    /// Every `(task, device)` with `x = 1`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(c, &x)| x.then_some((c / self.devices, c % self.devices)))
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&x| x)
    }

    /// Row-major 0/1 rows, for reports.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.tasks)
            .map(|i| (0..self.devices).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub percentage_served_buyers: f64,
    pub percentage_served_sellers: f64,
    pub total_utility: f64,
    pub average_utility: f64,
}

/// Everything a mechanism decides for one scenario. Per-agent vectors are
/// indexed like `Scenario::tasks` / `Scenario::devices`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub allocation: AllocationMatrix,
    pub prices: PriceMatrix,
    pub buyer_payments: Vec<f64>,
    pub seller_revenues: Vec<f64>,
    pub buyer_utilities: Vec<f64>,
    pub seller_utilities: Vec<f64>,
    /// Bundles each device delivered (its cost is charged once per bundle).
    pub device_assignments: Vec<u32>,
    pub auctioneer_surplus: f64,
    pub metrics: MetricsRecord,
}

impl AuctionOutcome {
    /// Fills in surplus and metrics from the per-agent parts.
    pub fn assemble(
        allocation: AllocationMatrix,
        prices: PriceMatrix,
        buyer_payments: Vec<f64>,
        seller_revenues: Vec<f64>,
        buyer_utilities: Vec<f64>,
        seller_utilities: Vec<f64>,
        device_assignments: Vec<u32>,
    ) -> Self {
        let mut outcome = Self {
            allocation,
            prices,
            buyer_payments,
            seller_revenues,
            buyer_utilities,
            seller_utilities,
            device_assignments,
            auctioneer_surplus: 0.0,
            metrics: MetricsRecord {
                percentage_served_buyers: 0.0,
                percentage_served_sellers: 0.0,
                total_utility: 0.0,
                average_utility: 0.0,
            },
        };
        outcome.auctioneer_surplus = crate::economics::auctioneer_surplus(&outcome);
        outcome.metrics = crate::economics::metrics(&outcome);
        outcome
    }

    /// The outcome in which nobody trades.
    pub fn empty(tasks: usize, devices: usize) -> Self {
        Self::assemble(
            AllocationMatrix::new(tasks, devices),
            PriceMatrix::zeros(tasks, devices),
            vec![0.0; tasks],
            vec![0.0; devices],
            vec![0.0; tasks],
            vec![0.0; devices],
            vec![0; devices],
        )
    }

    pub fn num_winning_tasks(&self) -> usize {
        self.allocation.winning_tasks().len()
    }

    pub fn num_winning_devices(&self) -> usize {
        self.allocation.winning_devices().len()
    }
}
