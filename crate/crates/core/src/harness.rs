//! Scenario generation, end-to-end runs, mechanism comparison, and the JSON
//! reports they produce.
//!
//! Report numbers are rounded to six decimal places and object keys are
//! sorted, so two runs over the same input give byte-identical files
//! (comparison runtimes excepted).

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::baselines::{random_allocation, TrialAggregate};
use crate::density::{normalize_devices, normalize_tasks, rank, DensityVariant, NormalizedBid};
use crate::economics::{property_report, PropertyReport};
use crate::error::{Error, Result};
use crate::mechanism::{run_cda, Mechanism, MechanismConfig};
use crate::model::{AuctionOutcome, DeviceBid, MetricsRecord, Scenario, TaskBid, EPS};
use crate::oracle::{exhaustive_welfare, welfare, OracleLimits};

pub const SCHEMA_VERSION: u32 = 1;

/// Misreport factors used when none are given.
pub const DEFAULT_FACTORS: [f64; 6] = [0.5, 0.75, 0.9, 1.1, 1.25, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub lo: T,
    pub hi: T,
}

impl<T> Range<T> {
    pub const fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub tasks: usize,
    pub devices: usize,
    pub resource_types: usize,
    pub demand_range: Range<f64>,
    pub supply_range: Range<f64>,
    pub valuation_range: Range<f64>,
    pub cost_range: Range<f64>,
    pub capacity_range: Range<u32>,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for GeneratorConfig {
    /// Magnitudes in the neighbourhood of the six-task reference instance.
    fn default() -> Self {
        Self {
            tasks: 6,
            devices: 5,
            resource_types: 2,
            demand_range: Range::new(5.0, 30.0),
            supply_range: Range::new(2.0, 10.0),
            valuation_range: Range::new(5.0, 15.0),
            cost_range: Range::new(0.5, 2.5),
            capacity_range: Range::new(1, 6),
            seed: 0,
            alpha: 0.01,
            beta: 0.05,
        }
    }
}

impl GeneratorConfig {
    fn check(&self) -> Result<()> {
        let real = [
            ("demand_range", self.demand_range),
            ("supply_range", self.supply_range),
            ("valuation_range", self.valuation_range),
            ("cost_range", self.cost_range),
        ];
        for (name, r) in real {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo >= 0.0 && r.lo <= r.hi) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must satisfy 0 <= lo <= hi, got [{}, {}]",
                    r.lo, r.hi
                )));
            }
        }
        if self.capacity_range.lo > self.capacity_range.hi {
            return Err(Error::InvalidArgument("capacity_range is empty".into()));
        }
        Ok(())
    }
}

/// Draws every quantity uniformly from its range with a seeded ChaCha8
/// stream. Ids are `T1..Tm` and `D1..Dn`.
pub fn generate(config: &GeneratorConfig) -> Result<Scenario> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = config.resource_types;

    let tasks: Vec<TaskBid> = (1..=config.tasks)
        .map(|i| TaskBid {
            id: format!("T{i}"),
            demand: (0..k)
                .map(|_| uniform(&mut rng, config.demand_range))
                .collect(),
            valuation: uniform(&mut rng, config.valuation_range),
        })
        .collect();
    let devices: Vec<DeviceBid> = (1..=config.devices)
        .map(|j| DeviceBid {
            id: format!("D{j}"),
            supply: (0..k)
                .map(|_| uniform(&mut rng, config.supply_range))
                .collect(),
            capacity: rng.gen_range(config.capacity_range.lo..=config.capacity_range.hi),
            cost: uniform(&mut rng, config.cost_range),
        })
        .collect();

    let scenario = Scenario {
        resource_types: k,
        alpha: config.alpha,
        beta: config.beta,
        tasks,
        devices,
    };
    scenario.validate().map_err(Error::Invalid)?;
    Ok(scenario)
}

fn uniform(rng: &mut ChaCha8Rng, r: Range<f64>) -> f64 {
    rng.gen_range(r.lo..=r.hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairPrice {
    pub task: String,
    pub device: String,
    pub price: f64,
}

/// An [`AuctionOutcome`] keyed by agent id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub allocation: Vec<Vec<u8>>,
    pub winning_tasks: Vec<String>,
    pub winning_devices: Vec<String>,
    pub prices: Vec<PairPrice>,
    pub payments: BTreeMap<String, f64>,
    pub revenues: BTreeMap<String, f64>,
    pub buyer_utilities: BTreeMap<String, f64>,
    pub seller_utilities: BTreeMap<String, f64>,
    pub surplus: f64,
}

impl OutcomeReport {
    pub fn new(scenario: &Scenario, outcome: &AuctionOutcome) -> Self {
        let x = &outcome.allocation;
        let task_ids = |v: &[f64]| -> BTreeMap<String, f64> {
            scenario
                .tasks
                .iter()
                .zip(v)
                .map(|(t, &u)| (t.id.clone(), u))
                .collect()
        };
        let device_ids = |v: &[f64]| -> BTreeMap<String, f64> {
            scenario
                .devices
                .iter()
                .zip(v)
                .map(|(d, &u)| (d.id.clone(), u))
                .collect()
        };
        Self {
            allocation: x.to_rows(),
            winning_tasks: x
                .winning_tasks()
                .into_iter()
                .map(|i| scenario.tasks[i].id.clone())
                .collect(),
            winning_devices: x
                .winning_devices()
                .into_iter()
                .map(|j| scenario.devices[j].id.clone())
                .collect(),
            prices: x
                .pairs()
                .map(|(i, j)| PairPrice {
                    task: scenario.tasks[i].id.clone(),
                    device: scenario.devices[j].id.clone(),
                    price: outcome.prices.get(i, j),
                })
                .collect(),
            payments: task_ids(&outcome.buyer_payments),
            revenues: device_ids(&outcome.seller_revenues),
            buyer_utilities: task_ids(&outcome.buyer_utilities),
            seller_utilities: device_ids(&outcome.seller_utilities),
            surplus: outcome.auctioneer_surplus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub mechanism: Mechanism,
    pub config: MechanismConfig,
    pub metrics: MetricsRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<TrialAggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub properties: Option<PropertyReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

/// The auctioneer pipeline for one mechanism: determine winners, price,
/// settle, and check individual rationality and budget balance (plus
/// truthfulness probes when `probe_factors` is non-empty).
///
/// `random` reports the trial aggregate; its `outcome` section is the
/// single trial drawn from `config.seed`.
pub fn run(
    scenario: &Scenario,
    mechanism: Mechanism,
    config: &MechanismConfig,
    probe_factors: &[f64],
) -> Result<(RunReport, AuctionOutcome)> {
    let outcome = mechanism.outcome(scenario, config)?;
    let properties = property_report(scenario, &outcome, mechanism, config, probe_factors)?;
    let (metrics, aggregate) = match mechanism {
        Mechanism::Random => {
            let agg = random_allocation(scenario, config.seed, config.trials, config.cost_model);
            (
                agg.metrics(scenario.num_tasks(), scenario.num_devices()),
                Some(agg),
            )
        }
        _ => (outcome.metrics, None),
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        mechanism,
        config: *config,
        metrics,
        outcome: Some(OutcomeReport::new(scenario, &outcome)),
        aggregate,
        properties: Some(properties),
    };
    Ok((report, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub mechanisms: Vec<Mechanism>,
    pub seed: u64,
    pub trials: usize,
    pub metrics: BTreeMap<String, MetricsRecord>,
    /// `100 * (a - b) / b` on total utility, keyed `"a_vs_b"`; pairs whose
    /// denominator utility is not above `EPS` are omitted.
    pub gain_pct: BTreeMap<String, f64>,
    pub runtime_ms: BTreeMap<String, f64>,
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn gain(&self, a: Mechanism, b: Mechanism) -> Option<f64> {
        self.gain_pct.get(&format!("{a}_vs_{b}")).copied()
    }
}

pub fn compare(
    scenario: &Scenario,
    mechanisms: &[Mechanism],
    config: &MechanismConfig,
) -> Result<CompareReport> {
    if mechanisms.len() < 2 {
        return Err(Error::InvalidArgument(
            "compare needs at least two mechanisms".into(),
        ));
    }
    for (k, m) in mechanisms.iter().enumerate() {
        if mechanisms[..k].contains(m) {
            return Err(Error::InvalidArgument(format!(
                "mechanism {m} listed twice"
            )));
        }
    }

    let mut metrics = BTreeMap::new();
    let mut runtime_ms = BTreeMap::new();
    for &mechanism in mechanisms {
        let start = Instant::now();
        let record = match mechanism {
            Mechanism::Random => {
                random_allocation(scenario, config.seed, config.trials, config.cost_model)
                    .metrics(scenario.num_tasks(), scenario.num_devices())
            }
            other => other.outcome(scenario, config)?.metrics,
        };
        runtime_ms.insert(mechanism.to_string(), start.elapsed().as_secs_f64() * 1e3);
        metrics.insert(mechanism.to_string(), record);
    }

    let mut gain_pct = BTreeMap::new();
    for &a in mechanisms {
        for &b in mechanisms {
            if a == b {
                continue;
            }
            let ua = metrics[&a.to_string()].total_utility;
            let ub = metrics[&b.to_string()].total_utility;
            if ub > EPS {
                gain_pct.insert(format!("{a}_vs_{b}"), 100.0 * (ua - ub) / ub);
            }
        }
    }

    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        mechanisms: mechanisms.to_vec(),
        seed: config.seed,
        trials: config.trials,
        metrics,
        gain_pct,
        runtime_ms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub id: String,
    pub normalized: Vec<f64>,
    pub density: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub schema_version: u32,
    pub variant: DensityVariant,
    pub tasks: Vec<DensityRow>,
    pub devices: Vec<DensityRow>,
}

impl DensityReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

/// Normalized bids, densities and 1-based ranks for both sides.
pub fn density_report(scenario: &Scenario, variant: DensityVariant) -> Result<DensityReport> {
    let ranking = rank(scenario, variant)?;
    let rows = |bids: Vec<NormalizedBid>, density: &[f64], order: &[usize]| {
        let mut position = vec![0; order.len()];
        for (r, &idx) in order.iter().enumerate() {
            position[idx] = r + 1;
        }
        bids.into_iter()
            .enumerate()
            .map(|(idx, b)| {
                let mut normalized = b.quantities;
                normalized.push(b.money);
                DensityRow {
                    id: b.id,
                    normalized,
                    density: density[idx],
                    rank: position[idx],
                }
            })
            .collect::<Vec<_>>()
    };
    Ok(DensityReport {
        schema_version: SCHEMA_VERSION,
        variant,
        tasks: rows(
            normalize_tasks(&scenario.tasks)?,
            &ranking.task_density,
            &ranking.task_order,
        ),
        devices: rows(
            normalize_devices(&scenario.devices)?,
            &ranking.device_density,
            &ranking.device_order,
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub best_welfare: f64,
    pub best_allocation: Vec<Vec<u8>>,
    pub states_examined: u64,
    pub exhausted: bool,
    pub greedy_welfare: f64,
    /// `greedy / oracle`; absent when the oracle welfare is not positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub greedy_ratio: Option<f64>,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

pub fn oracle_report(
    scenario: &Scenario,
    config: &MechanismConfig,
    limits: OracleLimits,
) -> Result<OracleReport> {
    let exact = exhaustive_welfare(scenario, limits, config.cost_model)?;
    let greedy = run_cda(scenario, config)?;
    let greedy_welfare = welfare(scenario, &greedy.outcome.allocation, config.cost_model);
    Ok(OracleReport {
        schema_version: SCHEMA_VERSION,
        best_welfare: exact.best_welfare,
        best_allocation: exact.best_allocation.to_rows(),
        states_examined: exact.states_examined,
        exhausted: exact.exhausted,
        greedy_welfare,
        greedy_ratio: (exact.best_welfare > EPS).then(|| greedy_welfare / exact.best_welfare),
    })
}

/// Pretty JSON with sorted keys and floats rounded to six decimals.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut text = serde_json::to_string_pretty(&round_floats(v)).expect("value serializes");
    text.push('\n');
    text
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            let r = (x * 1e6).round() / 1e6;
            let r = if r == 0.0 { 0.0 } else { r };
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}
