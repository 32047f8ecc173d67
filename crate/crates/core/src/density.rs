//! Bid normalization and bid densities, the sort keys of greedy winner
//! determination.
//!
//! Every column (each resource type, plus the money term) is divided by its
//! maximum over the current bid population, so normalized values lie in
//! `(0, 1]`. A task's density is the Euclidean norm of its normalized demand
//! and valuation; tasks are served in descending density order. Devices are
//! scanned in ascending density order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceBid, Scenario, TaskBid};

/// Which device-density formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityVariant {
    /// `sqrt(sum(s^2) + c^2)` over normalized supply and cost.
    #[default]
    Table,
    /// `sqrt(sum(1/s^2) + c^2)`: rewards devices with large bundles.
    Equation,
}

impl fmt::Display for DensityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensityVariant::Table => "table",
            DensityVariant::Equation => "equation",
        })
    }
}

impl FromStr for DensityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(DensityVariant::Table),
            "equation" => Ok(DensityVariant::Equation),
            other => Err(Error::InvalidArgument(format!(
                "unknown density variant {other:?} (expected table|equation)"
            ))),
        }
    }
}

/// A bid after column-max normalization: quantities (demand or supply) and
/// the money term (valuation or cost).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedBid {
    pub id: String,
    pub quantities: Vec<f64>,
    pub money: f64,
}

fn normalize<'a>(
    side: &'static str,
    rows: impl Iterator<Item = (&'a str, &'a [f64], f64)> + Clone,
) -> Result<Vec<NormalizedBid>> {
    let width = rows.clone().map(|(_, q, _)| q.len()).max().unwrap_or(0);
    let mut col_max = vec![0.0f64; width];
    let mut money_max = 0.0f64;
    for (_, q, money) in rows.clone() {
        for (m, &x) in col_max.iter_mut().zip(q) {
            *m = m.max(x);
        }
        money_max = money_max.max(money);
    }
    if let Some(column) = col_max.iter().position(|&m| m <= 0.0) {
        return Err(Error::DegenerateColumn { side, column });
    }
    if money_max <= 0.0 {
        return Err(Error::DegenerateColumn {
            side,
            column: width,
        });
    }
    Ok(rows
        .map(|(id, q, money)| NormalizedBid {
            id: id.to_string(),
            quantities: q.iter().zip(&col_max).map(|(x, m)| x / m).collect(),
            money: money / money_max,
        })
        .collect())
}

/// Demand columns and valuations divided by their maxima over `tasks`.
pub fn normalize_tasks(tasks: &[TaskBid]) -> Result<Vec<NormalizedBid>> {
    if tasks.is_empty() {
        return Err(Error::InvalidArgument("no tasks to normalize".into()));
    }
    normalize(
        "task",
        tasks
            .iter()
            .map(|t| (t.id.as_str(), t.demand.as_slice(), t.valuation)),
    )
}

/// Supply columns and costs divided by their maxima over `devices`.
pub fn normalize_devices(devices: &[DeviceBid]) -> Result<Vec<NormalizedBid>> {
    if devices.is_empty() {
        return Err(Error::InvalidArgument("no devices to normalize".into()));
    }
    normalize(
        "device",
        devices
            .iter()
            .map(|d| (d.id.as_str(), d.supply.as_slice(), d.cost)),
    )
}

pub fn task_density(task: &NormalizedBid) -> f64 {
    let sq: f64 = task.quantities.iter().map(|x| x * x).sum();
    (sq + task.money * task.money).sqrt()
}

pub fn device_density(device: &NormalizedBid, variant: DensityVariant) -> Result<f64> {
    let sq: f64 = match variant {
        DensityVariant::Table => device.quantities.iter().map(|s| s * s).sum(),
        DensityVariant::Equation => {
            if device.quantities.iter().any(|&s| s <= 0.0) {
                return Err(Error::InfiniteDensity {
                    device: device.id.clone(),
                });
            }
            device.quantities.iter().map(|s| 1.0 / (s * s)).sum()
        }
    };
    Ok((sq + device.money * device.money).sqrt())
}

/// Serving order for both sides of the market. Orders hold indices into
/// `Scenario::tasks` / `Scenario::devices`; densities are indexed the same way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRanking {
    pub task_order: Vec<usize>,
    pub device_order: Vec<usize>,
    pub task_density: Vec<f64>,
    pub device_density: Vec<f64>,
}

impl DensityRanking {
    pub fn task_order_ids<'a>(&self, scenario: &'a Scenario) -> Vec<&'a str> {
        self.task_order
            .iter()
            .map(|&i| scenario.tasks[i].id.as_str())
            .collect()
    }

    pub fn device_order_ids<'a>(&self, scenario: &'a Scenario) -> Vec<&'a str> {
        self.device_order
            .iter()
            .map(|&j| scenario.devices[j].id.as_str())
            .collect()
    }
}

/// Tasks by density descending, devices by density ascending; ties by id.
pub fn rank(scenario: &Scenario, variant: DensityVariant) -> Result<DensityRanking> {
    let task_density: Vec<f64> = normalize_tasks(&scenario.tasks)?
        .iter()
        .map(task_density)
        .collect();
    let device_density = normalize_devices(&scenario.devices)?
        .iter()
        .map(|d| device_density(d, variant))
        .collect::<Result<Vec<f64>>>()?;

    let mut task_order: Vec<usize> = (0..scenario.tasks.len()).collect();
    task_order.sort_by(|&a, &b| {
        task_density[b]
            .total_cmp(&task_density[a])
            .then_with(|| scenario.tasks[a].id.cmp(&scenario.tasks[b].id))
    });
    let mut device_order: Vec<usize> = (0..scenario.devices.len()).collect();
    device_order.sort_by(
        |&a, &b| match device_density[a].total_cmp(&device_density[b]) {
            Ordering::Equal => scenario.devices[a].id.cmp(&scenario.devices[b].id),
            o => o,
        },
    );

    Ok(DensityRanking {
        task_order,
        device_order,
        task_density,
        device_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_scenario;
    use approx::assert_abs_diff_eq;

    fn bid(q: &[f64], money: f64) -> NormalizedBid {
        NormalizedBid {
            id: "x".into(),
            quantities: q.to_vec(),
            money,
        }
    }

    #[test]
    fn task_normalization_matches_hand_division() {
        let n = normalize_tasks(&reference_scenario().tasks).unwrap();
        assert_eq!(n[0].quantities, vec![1.0, 1.0]);
        assert_eq!(n[0].money, 1.0);
        assert_abs_diff_eq!(n[1].quantities[1], 0.666667, epsilon = 1e-6);
        assert_abs_diff_eq!(n[1].money, 0.923077, epsilon = 1e-6);
    }

    #[test]
    fn device_normalization_matches_hand_division() {
        let n = normalize_devices(&reference_scenario().devices).unwrap();
        assert_abs_diff_eq!(n[0].quantities[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(n[0].quantities[1], 0.666667, epsilon = 1e-6);
        assert_abs_diff_eq!(n[0].money, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(n[3].quantities[1], 0.888889, epsilon = 1e-6);
        assert_eq!(n[3].quantities[0], 1.0);
        assert_eq!(n[3].money, 1.0);
    }

    #[test]
    fn single_bid_normalizes_to_ones() {
        let s = reference_scenario();
        let t = normalize_tasks(&s.tasks[3..4]).unwrap();
        assert_eq!(t[0].quantities, vec![1.0, 1.0]);
        assert_eq!(t[0].money, 1.0);
        let d = normalize_devices(&s.devices[2..3]).unwrap();
        assert_eq!(d[0].quantities, vec![1.0, 1.0]);
        assert_eq!(d[0].money, 1.0);
    }

    #[test]
    fn zero_column_is_degenerate() {
        let mut s = reference_scenario();
        for t in &mut s.tasks {
            t.demand[1] = 0.0;
        }
        assert_eq!(
            normalize_tasks(&s.tasks).unwrap_err(),
            Error::DegenerateColumn {
                side: "task",
                column: 1
            }
        );
    }

    #[test]
    fn task_densities() {
        assert_abs_diff_eq!(
            task_density(&bid(&[1.0, 1.0], 1.0)),
            1.732051,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            task_density(&bid(&[1.0, 2.0 / 3.0], 12.0 / 13.0)),
            1.515426,
            epsilon = 1e-6
        );
        assert_eq!(task_density(&bid(&[0.0, 0.0], 0.0)), 0.0);
    }

    #[test]
    fn device_densities_both_variants() {
        let d1 = bid(&[0.3, 6.0 / 9.0], 0.5);
        let d5 = bid(&[0.9, 1.0], 1.0);
        assert_abs_diff_eq!(
            device_density(&d1, DensityVariant::Table).unwrap(),
            0.885689,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            device_density(&d5, DensityVariant::Table).unwrap(),
            1.676305,
            epsilon = 1e-6
        );
        // sqrt(1/0.09 + 1/(4/9) + 0.25)
        assert_abs_diff_eq!(
            device_density(&d1, DensityVariant::Equation).unwrap(),
            3.689324,
            epsilon = 1e-6
        );
        assert!(matches!(
            device_density(&bid(&[0.0, 1.0], 1.0), DensityVariant::Equation),
            Err(Error::InfiniteDensity { .. })
        ));
    }

    #[test]
    fn reference_ranking() {
        let s = reference_scenario();
        let r = rank(&s, DensityVariant::Table).unwrap();
        assert_eq!(r.device_order_ids(&s), ["D1", "D2", "D3", "D4", "D5"]);
        assert_eq!(r.task_order_ids(&s), ["T1", "T2", "T3", "T4", "T5", "T6"]);
        let expected = [1.732051, 1.515426, 1.496984, 1.469837, 1.044852, 0.916734];
        for (got, want) in r.task_density.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-6);
        }
    }

    #[test]
    fn equation_variant_reverses_bundle_preference() {
        let s = reference_scenario();
        let r = rank(&s, DensityVariant::Equation).unwrap();
        assert_eq!(r.device_order_ids(&s), ["D5", "D4", "D3", "D2", "D1"]);
    }

    #[test]
    fn identical_bids_tie_break_by_id() {
        let mut s = reference_scenario();
        s.tasks[4] = s.tasks[0].clone();
        s.tasks[4].id = "A".into();
        s.tasks[0].id = "B".into();
        let r = rank(&s, DensityVariant::Table).unwrap();
        assert_eq!(&r.task_order_ids(&s)[..2], ["A", "B"]);
    }

    #[test]
    fn variant_parses() {
        assert_eq!(
            "equation".parse::<DensityVariant>().unwrap(),
            DensityVariant::Equation
        );
        assert!("fancy".parse::<DensityVariant>().is_err());
    }
}
