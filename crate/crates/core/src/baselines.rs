//! Comparison mechanisms: a one-to-one double auction, uniformly random
//! combinatorial assignment, and maximum-cardinality matching.
//!
//! All three produce an [`AuctionOutcome`] so they can be scored with the
//! same metrics as the combinatorial auction. The one-to-one mechanisms put
//! the whole-trade price of each matched pair in the price matrix.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::economics::{settle, CostModel};
use crate::model::{AllocationMatrix, AuctionOutcome, MetricsRecord, Scenario, EPS};
use crate::pricing::PriceMatrix;

/// Sorted-match double auction: buyers by valuation descending, sellers by
/// cost ascending, k-th buyer with k-th seller while the buyer values the
/// trade above the seller's cost. Each pair trades at `(v + c) / 2` and the
/// task is handled whole by its one device.
pub fn double_auction(scenario: &Scenario) -> AuctionOutcome {
    let m = scenario.num_tasks();
    let n = scenario.num_devices();
    let mut buyers: Vec<usize> = (0..m).collect();
    buyers.sort_by(|&a, &b| {
        let (ta, tb) = (&scenario.tasks[a], &scenario.tasks[b]);
        tb.valuation
            .total_cmp(&ta.valuation)
            .then_with(|| ta.id.cmp(&tb.id))
    });
    let mut sellers: Vec<usize> = (0..n).collect();
    sellers.sort_by(|&a, &b| {
        let (da, db) = (&scenario.devices[a], &scenario.devices[b]);
        da.cost.total_cmp(&db.cost).then_with(|| da.id.cmp(&db.id))
    });

    let mut book = OneToOneBook::new(m, n);
    for (&i, &j) in buyers.iter().zip(&sellers) {
        let v = scenario.tasks[i].valuation;
        let c = scenario.devices[j].cost;
        if v <= c {
            break;
        }
        book.trade(i, j, v, c, 1);
    }
    book.finish()
}

struct OneToOneBook {
    x: AllocationMatrix,
    prices: PriceMatrix,
    payments: Vec<f64>,
    revenues: Vec<f64>,
    buyer_utilities: Vec<f64>,
    seller_utilities: Vec<f64>,
    assignments: Vec<u32>,
}

impl OneToOneBook {
    fn new(m: usize, n: usize) -> Self {
        Self {
            x: AllocationMatrix::new(m, n),
            prices: PriceMatrix::zeros(m, n),
            payments: vec![0.0; m],
            revenues: vec![0.0; n],
            buyer_utilities: vec![0.0; m],
            seller_utilities: vec![0.0; n],
            assignments: vec![0; n],
        }
    }

    /// Records a trade at the midpoint of the buyer's net value and the
    /// seller's total cost.
    fn trade(&mut self, i: usize, j: usize, value: f64, cost: f64, bundles: u32) {
        let price = (value + cost) / 2.0;
        self.x.set(i, j, true);
        self.x.set_winner(i, true);
        self.prices.set(i, j, price);
        self.payments[i] = price;
        self.revenues[j] = price;
        self.buyer_utilities[i] = value - price;
        self.seller_utilities[j] = price - cost;
        self.assignments[j] = bundles;
    }

    fn finish(self) -> AuctionOutcome {
        AuctionOutcome::assemble(
            self.x,
            self.prices,
            self.payments,
            self.revenues,
            self.buyer_utilities,
            self.seller_utilities,
            self.assignments,
        )
    }
}

/// Smallest number of bundles from `device` covering `task`, if within capacity.
fn bundles_needed(scenario: &Scenario, task: usize, device: usize) -> Option<u32> {
    let t = &scenario.tasks[task];
    let d = &scenario.devices[device];
    let mut q = 0u32;
    for (need, &s) in t.demand.iter().zip(&d.supply) {
        if *need <= EPS {
            continue;
        }
        if s <= 0.0 {
            return None;
        }
        let k = ((need - EPS) / s).ceil().max(1.0);
        if k > d.capacity as f64 {
            return None;
        }
        q = q.max(k as u32);
    }
    Some(q.max(1))
}

/// Maximum-cardinality matching over profitable whole-task edges.
///
/// Task `i` and device `j` are adjacent when some `q <= capacity_j` bundles
/// of `j` cover `i`'s demand and `v_i - e_i > q * c_j` (smallest such `q`).
/// Augmenting paths from tasks in scenario order; each matched pair trades
/// at the midpoint between `v_i - e_i` and `q * c_j`.
pub fn maximum_matching(scenario: &Scenario, cost_model: CostModel) -> AuctionOutcome {
    let m = scenario.num_tasks();
    let n = scenario.num_devices();
    let net_value: Vec<f64> = scenario
        .tasks
        .iter()
        .map(|t| t.valuation - cost_model.cost(t, 1, scenario.alpha, scenario.beta))
        .collect();

    // adjacency[i] = [(device, bundles)]
    let adjacency: Vec<Vec<(usize, u32)>> = (0..m)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    let q = bundles_needed(scenario, i, j)?;
                    (net_value[i] > q as f64 * scenario.devices[j].cost).then_some((j, q))
                })
                .collect()
        })
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..m {
        let mut visited = vec![false; n];
        augment(i, &adjacency, &mut owner, &mut visited);
    }

    let mut book = OneToOneBook::new(m, n);
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = *o {
            let q = adjacency[i]
                .iter()
                .find(|&&(d, _)| d == j)
                .map(|&(_, q)| q)
                .expect("matched pair is an edge");
            book.trade(i, j, net_value[i], q as f64 * scenario.devices[j].cost, q);
        }
    }
    book.finish()
}

fn augment(
    task: usize,
    adjacency: &[Vec<(usize, u32)>],
    owner: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &(j, _) in &adjacency[task] {
        if visited[j] {
            continue;
        }
        visited[j] = true;
        let free = match owner[j] {
            None => true,
            Some(other) => augment(other, adjacency, owner, visited),
        };
        if free {
            owner[j] = Some(task);
            return true;
        }
    }
    false
}

/// One random combinatorial assignment, settled with midpoint pricing.
///
/// Tasks are visited in a uniformly random order. Each task draws devices
/// uniformly without replacement among those with spare capacity and takes
/// one bundle from each until covered or out of candidates. It is served
/// only if covered and the bundle costs fit within `v - e`; otherwise its
/// bundles are returned.
pub fn random_trial(scenario: &Scenario, seed: u64, cost_model: CostModel) -> AuctionOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = scenario.num_tasks();
    let n = scenario.num_devices();
    let mut x = AllocationMatrix::new(m, n);
    let mut capacity: Vec<u32> = scenario.devices.iter().map(|d| d.capacity).collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    for i in order {
        let task = &scenario.tasks[i];
        let mut candidates: Vec<usize> = (0..n).filter(|&j| capacity[j] > 0).collect();
        candidates.shuffle(&mut rng);

        let mut remaining = task.demand.clone();
        let mut spent = 0.0;
        let mut used = Vec::new();
        for j in candidates {
            if !remaining.iter().any(|&r| r > EPS) {
                break;
            }
            let d = &scenario.devices[j];
            capacity[j] -= 1;
            spent += d.cost;
            for (r, s) in remaining.iter_mut().zip(&d.supply) {
                *r -= s;
            }
            used.push(j);
        }

        let covered = remaining.iter().all(|&r| r <= EPS);
        let e = cost_model.cost(task, used.len(), scenario.alpha, scenario.beta);
        if covered && spent <= task.valuation - e + EPS {
            for &j in &used {
                x.set(i, j, true);
            }
            x.set_winner(i, true);
        } else {
            for &j in &used {
                capacity[j] += 1;
            }
        }
    }
    settle(scenario, x, cost_model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialAggregate {
    pub trials: usize,
    pub mean_tasks_served: f64,
    pub mean_devices_used: f64,
    pub mean_total_utility: f64,
    pub seed: u64,
}

impl TrialAggregate {
    /// Metrics of the average trial.
    pub fn metrics(&self, tasks: usize, devices: usize) -> MetricsRecord {
        let ratio = |x: f64, d: usize| if d == 0 { 0.0 } else { x / d as f64 };
        MetricsRecord {
            percentage_served_buyers: ratio(self.mean_tasks_served, tasks),
            percentage_served_sellers: ratio(self.mean_devices_used, devices),
            total_utility: self.mean_total_utility,
            average_utility: ratio(self.mean_total_utility, tasks + devices),
        }
    }
}

/// Averages `trials` random assignments. Trial `t` uses seed `seed + t`, so
/// the result depends only on `(scenario, seed, trials)`; trials run on the
/// current rayon pool and are summed in trial order.
pub fn random_allocation(
    scenario: &Scenario,
    seed: u64,
    trials: usize,
    cost_model: CostModel,
) -> TrialAggregate {
    let per_trial: Vec<(usize, usize, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let o = random_trial(scenario, seed.wrapping_add(t as u64), cost_model);
            (
                o.num_winning_tasks(),
                o.num_winning_devices(),
                o.metrics.total_utility,
            )
        })
        .collect();

    let denom = trials.max(1) as f64;
    let (mut served, mut used, mut utility) = (0usize, 0usize, 0.0f64);
    for (s, u, w) in per_trial {
        served += s;
        used += u;
        utility += w;
    }
    TrialAggregate {
        trials,
        mean_tasks_served: served as f64 / denom,
        mean_devices_used: used as f64 / denom,
        mean_total_utility: utility / denom,
        seed,
    }
}
