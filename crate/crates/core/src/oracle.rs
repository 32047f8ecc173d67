//! Exact welfare maximization by enumeration, for small instances.
//!
//! Under shared-matrix midpoint pricing the payments cancel between buyers
//! and sellers, so total utility of any allocation is
//! `sum over winners (v_i - e_i) - sum over assignments c_j`. The oracle
//! enumerates every binary matrix whose nonzero rows cover their task and
//! whose columns respect capacity, and returns the best one.

use serde::Serialize;

use crate::economics::CostModel;
use crate::error::{Error, Result};
use crate::model::{AllocationMatrix, Scenario, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Upper bound on `2^(m*n)`.
    pub max_states: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_states: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(skip)]
    pub best_allocation: AllocationMatrix,
    pub best_welfare: f64,
    /// Complete feasible matrices evaluated.
    pub states_examined: u64,
    pub exhausted: bool,
}

/// Price-independent total utility of an allocation.
pub fn welfare(scenario: &Scenario, x: &AllocationMatrix, cost_model: CostModel) -> f64 {
    let mut total = 0.0;
    for i in x.winning_tasks() {
        let t = &scenario.tasks[i];
        total += t.valuation - cost_model.cost(t, x.row_sum(i), scenario.alpha, scenario.beta);
    }
    for (_, j) in x.pairs() {
        total -= scenario.devices[j].cost;
    }
    total
}

pub fn exhaustive_welfare(
    scenario: &Scenario,
    limits: OracleLimits,
    cost_model: CostModel,
) -> Result<OracleResult> {
    let m = scenario.num_tasks();
    let n = scenario.num_devices();
    let cells = m * n;
    let states = if cells >= 127 {
        u128::MAX
    } else {
        1u128 << cells
    };
    if states > limits.max_states {
        return Err(Error::InstanceTooLarge {
            states,
            limit: limits.max_states,
        });
    }

    // Row masks use bit (n - 1 - j) for device j, so ascending masks are
    // lexicographically ascending rows.
    let options: Vec<Vec<RowOption>> = (0..m)
        .map(|i| row_options(scenario, i, cost_model))
        .collect();

    let mut search = Search {
        scenario,
        options: &options,
        used: vec![0; n],
        chosen: vec![0; m],
        best_rows: vec![0; m],
        best: 0.0,
        found: false,
        examined: 0,
    };
    search.visit(0, 0.0);

    let mut best_allocation = AllocationMatrix::new(m, n);
    for (i, &mask) in search.best_rows.iter().enumerate() {
        if mask != 0 {
            for j in 0..n {
                if mask & (1 << (n - 1 - j)) != 0 {
                    best_allocation.set(i, j, true);
                }
            }
            best_allocation.set_winner(i, true);
        }
    }
    Ok(OracleResult {
        best_allocation,
        best_welfare: search.best,
        states_examined: search.examined,
        exhausted: true,
    })
}

struct RowOption {
    mask: u64,
    value: f64,
}

/// The empty row, then every covering device subset, in ascending mask order.
fn row_options(scenario: &Scenario, task: usize, cost_model: CostModel) -> Vec<RowOption> {
    let n = scenario.num_devices();
    let t = &scenario.tasks[task];
    let mut out = vec![RowOption {
        mask: 0,
        value: 0.0,
    }];
    for mask in 1u64..(1u64 << n) {
        let mut got = vec![0.0; t.demand.len()];
        let mut cost = 0.0;
        for j in 0..n {
            if mask & (1 << (n - 1 - j)) != 0 {
                let d = &scenario.devices[j];
                cost += d.cost;
                for (g, s) in got.iter_mut().zip(&d.supply) {
                    *g += s;
                }
            }
        }
        if got.iter().zip(&t.demand).all(|(g, need)| g + EPS >= *need) {
            let fanout = mask.count_ones() as usize;
            let e = cost_model.cost(t, fanout, scenario.alpha, scenario.beta);
            out.push(RowOption {
                mask,
                value: t.valuation - e - cost,
            });
        }
    }
    out
}

struct Search<'a> {
    scenario: &'a Scenario,
    options: &'a [Vec<RowOption>],
    used: Vec<u32>,
    chosen: Vec<u64>,
    best_rows: Vec<u64>,
    best: f64,
    found: bool,
    examined: u64,
}

impl Search<'_> {
    fn visit(&mut self, task: usize, value: f64) {
        if task == self.options.len() {
            self.examined += 1;
            if !self.found || value > self.best + EPS {
                self.found = true;
                self.best = value;
                self.best_rows.copy_from_slice(&self.chosen);
            }
            return;
        }
        let n = self.used.len();
        for option in &self.options[task] {
            let fits = (0..n).all(|j| {
                option.mask & (1 << (n - 1 - j)) == 0
                    || self.used[j] < self.scenario.devices[j].capacity
            });
            if !fits {
                continue;
            }
            self.apply(option.mask, true);
            self.chosen[task] = option.mask;
            self.visit(task + 1, value + option.value);
            self.apply(option.mask, false);
        }
        self.chosen[task] = 0;
    }

    fn apply(&mut self, mask: u64, add: bool) {
        let n = self.used.len();
        for j in 0..n {
            if mask & (1 << (n - 1 - j)) != 0 {
                if add {
                    self.used[j] += 1;
                } else {
                    self.used[j] -= 1;
                }
            }
        }
    }
}
