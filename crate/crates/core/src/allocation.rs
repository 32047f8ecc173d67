//! Greedy winner determination.
//!
//! Tasks are visited in descending density order. Each task scans devices in
//! ascending density order and takes one bundle from every device that still
//! has capacity, while its remaining budget exceeds the device's cost and it
//! still has unmet demand. A task whose demand is not fully covered at the
//! end of the scan gives all of its bundles back and loses.

use std::fmt;

use serde::Serialize;

use crate::density::DensityRanking;
use crate::economics::CostModel;
use crate::model::{AllocationMatrix, Scenario, EPS};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Assign {
        task: String,
        device: String,
        remaining_demand: Vec<f64>,
        remaining_capacity: u32,
    },
    TaskWon {
        task: String,
        devices: Vec<String>,
    },
    TaskRolledBack {
        task: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AllocationTrace {
    pub events: Vec<TraceEvent>,
    /// Number of (task, device) pairs the scan examined.
    pub pair_visits: usize,
}

impl AllocationTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }
}

pub fn greedy_allocate(
    scenario: &Scenario,
    ranking: &DensityRanking,
    cost_model: CostModel,
) -> (AllocationMatrix, AllocationTrace) {
    let m = scenario.num_tasks();
    let n = scenario.num_devices();
    let mut x = AllocationMatrix::new(m, n);
    let mut trace = AllocationTrace::default();
    let mut capacity: Vec<u32> = scenario.devices.iter().map(|d| d.capacity).collect();
    let overhead = cost_model.per_assignment_overhead(scenario.alpha);

    for &i in &ranking.task_order {
        let task = &scenario.tasks[i];
        let mut remaining = task.demand.clone();
        let mut budget = cost_model.initial_budget(task, scenario.alpha, scenario.beta);
        let mut used = Vec::new();

        for &j in &ranking.device_order {
            if !has_unmet(&remaining) {
                break;
            }
            trace.pair_visits += 1;
            let device = &scenario.devices[j];
            let charge = device.cost + overhead;
            if capacity[j] > 0 && budget > charge {
                x.set(i, j, true);
                capacity[j] -= 1;
                budget -= charge;
                for (r, s) in remaining.iter_mut().zip(&device.supply) {
                    *r -= s;
                }
                used.push(j);
                trace.events.push(TraceEvent::Assign {
                    task: task.id.clone(),
                    device: device.id.clone(),
                    remaining_demand: remaining.clone(),
                    remaining_capacity: capacity[j],
                });
            }
        }

        if has_unmet(&remaining) {
            for &j in &used {
                capacity[j] += 1;
            }
            x.clear_row(i);
            trace.events.push(TraceEvent::TaskRolledBack {
                task: task.id.clone(),
            });
        } else {
            x.set_winner(i, true);
            trace.events.push(TraceEvent::TaskWon {
                task: task.id.clone(),
                devices: used
                    .iter()
                    .map(|&j| scenario.devices[j].id.clone())
                    .collect(),
            });
        }
    }

    (x, trace)
}

fn has_unmet(remaining: &[f64]) -> bool {
    remaining.iter().any(|&r| r > EPS)
}

/// A violated allocation constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintViolation {
    Dimensions,
    /// More assignments than the device's capacity.
    Capacity(String),
    /// A winning task whose assigned bundles do not cover its demand.
    Coverage(String),
    /// A losing task that still holds assignments.
    LoserAssigned(String),
    /// One-to-one semantics: a task or device matched more than once.
    NotOneToOne(String),
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintViolation::Dimensions => write!(f, "dimension mismatch"),
            ConstraintViolation::Capacity(id) => write!(f, "capacity {id}"),
            ConstraintViolation::Coverage(id) => write!(f, "coverage {id}"),
            ConstraintViolation::LoserAssigned(id) => write!(f, "loser assigned {id}"),
            ConstraintViolation::NotOneToOne(id) => write!(f, "not one-to-one {id}"),
        }
    }
}

fn check_common(
    scenario: &Scenario,
    x: &AllocationMatrix,
    out: &mut Vec<ConstraintViolation>,
) -> bool {
    if x.num_tasks() != scenario.num_tasks() || x.num_devices() != scenario.num_devices() {
        out.push(ConstraintViolation::Dimensions);
        return false;
    }
    for (j, d) in scenario.devices.iter().enumerate() {
        if x.column_sum(j) > d.capacity as usize {
            out.push(ConstraintViolation::Capacity(d.id.clone()));
        }
    }
    for (i, t) in scenario.tasks.iter().enumerate() {
        if !x.is_winner(i) && x.row_sum(i) > 0 {
            out.push(ConstraintViolation::LoserAssigned(t.id.clone()));
        }
    }
    true
}

/// Capacity and coverage constraints of the combinatorial model, plus the
/// rule that losing rows are empty.
pub fn feasibility_check(
    scenario: &Scenario,
    x: &AllocationMatrix,
) -> Result<(), Vec<ConstraintViolation>> {
    let mut out = Vec::new();
    if check_common(scenario, x, &mut out) {
        for i in x.winning_tasks() {
            let task = &scenario.tasks[i];
            let mut got = vec![0.0; task.demand.len()];
            for j in x.row(i) {
                for (g, s) in got.iter_mut().zip(&scenario.devices[j].supply) {
                    *g += s;
                }
            }
            if got.iter().zip(&task.demand).any(|(g, d)| g + EPS < *d) {
                out.push(ConstraintViolation::Coverage(task.id.clone()));
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Constraints for one-to-one baselines: every winner holds exactly one
/// device, every device serves at most one task.
pub fn feasibility_check_one_to_one(
    scenario: &Scenario,
    x: &AllocationMatrix,
) -> Result<(), Vec<ConstraintViolation>> {
    let mut out = Vec::new();
    if check_common(scenario, x, &mut out) {
        for i in x.winning_tasks() {
            if x.row_sum(i) != 1 {
                out.push(ConstraintViolation::NotOneToOne(
                    scenario.tasks[i].id.clone(),
                ));
            }
        }
        for (j, d) in scenario.devices.iter().enumerate() {
            if x.column_sum(j) > 1 {
                out.push(ConstraintViolation::NotOneToOne(d.id.clone()));
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
