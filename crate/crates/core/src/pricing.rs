//! Midpoint pricing over a fixed allocation.
//!
//! Each winning task has a per-unit valuation (its valuation spread over all
//! units it received); each device has a per-unit cost (its cost spread over
//! one bundle). A matched pair trades at the midpoint of the two, or at the
//! device's per-unit cost when the device's price is above the task's. Both
//! sides settle against the same matrix, so payments and revenues balance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AllocationMatrix, DeviceBid, Scenario};

/// Per-unit pair prices; zero wherever `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceMatrix {
    tasks: usize,
    devices: usize,
    cells: Vec<f64>,
}

impl PriceMatrix {
    pub fn zeros(tasks: usize, devices: usize) -> Self {
        Self {
            tasks,
            devices,
            cells: vec![0.0; tasks * devices],
        }
    }

    pub fn get(&self, task: usize, device: usize) -> f64 {
        self.cells[task * self.devices + device]
    }

    pub fn set(&mut self, task: usize, device: usize, price: f64) {
        self.cells[task * self.devices + device] = price;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.cells
            .chunks(self.devices.max(1))
            .map(<[f64]>::to_vec)
            .take(self.tasks)
            .collect()
    }
}

/// Total resource units (all types) delivered to a winning task.
pub fn resources_won(scenario: &Scenario, x: &AllocationMatrix, task: usize) -> Result<f64> {
    if !x.is_winner(task) {
        return Err(Error::NotAWinner {
            task: scenario.tasks[task].id.clone(),
        });
    }
    Ok(x.row(task)
        .map(|j| scenario.devices[j].bundle_units())
        .sum())
}

pub fn per_unit_task_price(scenario: &Scenario, x: &AllocationMatrix, task: usize) -> Result<f64> {
    let units = resources_won(scenario, x, task)?;
    if units <= 0.0 {
        return Err(Error::NotAWinner {
            task: scenario.tasks[task].id.clone(),
        });
    }
    Ok(scenario.tasks[task].valuation / units)
}

pub fn per_unit_device_price(device: &DeviceBid) -> f64 {
    device.cost / device.bundle_units()
}

pub fn price_matrix(scenario: &Scenario, x: &AllocationMatrix) -> PriceMatrix {
    let mut p = PriceMatrix::zeros(x.num_tasks(), x.num_devices());
    for i in x.winning_tasks() {
        let Ok(task_price) = per_unit_task_price(scenario, x, i) else {
            continue;
        };
        for j in x.row(i) {
            let device_price = per_unit_device_price(&scenario.devices[j]);
            let mid = (task_price + device_price) / 2.0;
            let price = if device_price <= mid && mid <= task_price {
                mid
            } else {
                device_price
            };
            p.set(i, j, price);
        }
    }
    p
}

/// Buyer payments and seller revenues: every matched pair moves
/// `P_ij * bundle_units_j` from task `i` to device `j`.
pub fn trade_prices(
    scenario: &Scenario,
    x: &AllocationMatrix,
    prices: &PriceMatrix,
) -> (Vec<f64>, Vec<f64>) {
    let mut payments = vec![0.0; x.num_tasks()];
    let mut revenues = vec![0.0; x.num_devices()];
    for (i, j) in x.pairs() {
        if !x.is_winner(i) {
            continue;
        }
        let amount = prices.get(i, j) * scenario.devices[j].bundle_units();
        payments[i] += amount;
        revenues[j] += amount;
    }
    (payments, revenues)
}
