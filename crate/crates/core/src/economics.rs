//! Utilities, auctioneer surplus, and executable checks of individual
//! rationality, budget balance and (probed) truthfulness.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{Mechanism, MechanismConfig};
use crate::model::{AllocationMatrix, AuctionOutcome, MetricsRecord, Scenario, TaskBid, EPS};
use crate::pricing::{price_matrix, trade_prices};

/// How the overhead of splitting a task over several devices is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// `alpha * total demanded units + beta`; known before allocation.
    #[default]
    Units,
    /// `alpha * devices used + beta`; charged per assignment during allocation.
    Fanout,
}

impl CostModel {
    /// Distribution cost of a task that ends up on `fanout` devices.
    pub fn cost(self, task: &TaskBid, fanout: usize, alpha: f64, beta: f64) -> f64 {
        match self {
            CostModel::Units => distribution_cost(task, alpha, beta),
            CostModel::Fanout => alpha * fanout as f64 + beta,
        }
    }

    /// Budget a task starts greedy allocation with.
    pub fn initial_budget(self, task: &TaskBid, alpha: f64, beta: f64) -> f64 {
        match self {
            CostModel::Units => task.valuation - distribution_cost(task, alpha, beta),
            CostModel::Fanout => task.valuation - beta,
        }
    }

    /// Extra charge per assignment on top of the device's cost.
    pub fn per_assignment_overhead(self, alpha: f64) -> f64 {
        match self {
            CostModel::Units => 0.0,
            CostModel::Fanout => alpha,
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostModel::Units => "units",
            CostModel::Fanout => "fanout",
        })
    }
}

impl FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "units" => Ok(CostModel::Units),
            "fanout" => Ok(CostModel::Fanout),
            other => Err(Error::InvalidArgument(format!(
                "unknown cost model {other:?} (expected units|fanout)"
            ))),
        }
    }
}

/// `alpha * sum(demand) + beta`.
pub fn distribution_cost(task: &TaskBid, alpha: f64, beta: f64) -> f64 {
    alpha * task.total_demand() + beta
}

/// `(v - e) - payment` for a winning task, 0 otherwise.
pub fn buyer_utility(
    scenario: &Scenario,
    x: &AllocationMatrix,
    payments: &[f64],
    task: usize,
    cost_model: CostModel,
) -> f64 {
    if !x.is_winner(task) {
        return 0.0;
    }
    let t = &scenario.tasks[task];
    let e = cost_model.cost(t, x.row_sum(task), scenario.alpha, scenario.beta);
    t.valuation - e - payments[task]
}

/// `revenue - cost * assignments` for a device with at least one assignment.
pub fn seller_utility(
    scenario: &Scenario,
    x: &AllocationMatrix,
    revenues: &[f64],
    device: usize,
) -> f64 {
    let assignments = x.column_sum(device);
    if assignments == 0 {
        return 0.0;
    }
    revenues[device] - scenario.devices[device].cost * assignments as f64
}

/// Prices and settles a combinatorial allocation: midpoint price matrix,
/// trade prices, and both sides' utilities.
pub fn settle(scenario: &Scenario, x: AllocationMatrix, cost_model: CostModel) -> AuctionOutcome {
    let prices = price_matrix(scenario, &x);
    let (payments, revenues) = trade_prices(scenario, &x, &prices);
    let buyer_utilities = (0..scenario.num_tasks())
        .map(|i| buyer_utility(scenario, &x, &payments, i, cost_model))
        .collect();
    let seller_utilities = (0..scenario.num_devices())
        .map(|j| seller_utility(scenario, &x, &revenues, j))
        .collect();
    let assignments = (0..scenario.num_devices())
        .map(|j| x.column_sum(j) as u32)
        .collect();
    AuctionOutcome::assemble(
        x,
        prices,
        payments,
        revenues,
        buyer_utilities,
        seller_utilities,
        assignments,
    )
}

/// Payments received minus revenues paid out.
pub fn auctioneer_surplus(outcome: &AuctionOutcome) -> f64 {
    outcome.buyer_payments.iter().sum::<f64>() - outcome.seller_revenues.iter().sum::<f64>()
}

pub fn metrics(outcome: &AuctionOutcome) -> MetricsRecord {
    let m = outcome.allocation.num_tasks();
    let n = outcome.allocation.num_devices();
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let total_utility =
        outcome.buyer_utilities.iter().sum::<f64>() + outcome.seller_utilities.iter().sum::<f64>();
    MetricsRecord {
        percentage_served_buyers: ratio(outcome.allocation.winning_tasks().len(), m),
        percentage_served_sellers: ratio(outcome.allocation.winning_devices().len(), n),
        total_utility,
        average_utility: if m + n == 0 {
            0.0
        } else {
            total_utility / (m + n) as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buyer,
    Seller,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentUtility {
    pub id: String,
    pub side: Side,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndividualRationality {
    pub pass: bool,
    pub violations: Vec<AgentUtility>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetBalance {
    pub pass: bool,
    pub surplus: f64,
}

/// One misreport experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub agent: String,
    pub side: Side,
    pub factor: f64,
    pub truthful_utility: f64,
    pub misreport_utility: f64,
    pub won_truthful: bool,
    pub won_misreport: bool,
    pub profitable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub individual_rationality: IndividualRationality,
    pub budget_balance: BudgetBalance,
    pub truthfulness_probe: Vec<ProbeEntry>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.individual_rationality.pass
            && self.budget_balance.pass
            && !self.truthfulness_probe.iter().any(|p| p.profitable)
    }
}

/// Lists every agent whose utility is below `-EPS`.
pub fn verify_individual_rationality(
    scenario: &Scenario,
    outcome: &AuctionOutcome,
) -> IndividualRationality {
    let buyers = scenario
        .tasks
        .iter()
        .zip(&outcome.buyer_utilities)
        .map(|(t, &u)| (t.id.as_str(), Side::Buyer, u));
    let sellers = scenario
        .devices
        .iter()
        .zip(&outcome.seller_utilities)
        .map(|(d, &u)| (d.id.as_str(), Side::Seller, u));
    let violations: Vec<AgentUtility> = buyers
        .chain(sellers)
        .filter(|&(_, _, u)| u < -EPS)
        .map(|(id, side, utility)| AgentUtility {
            id: id.to_string(),
            side,
            utility,
        })
        .collect();
    IndividualRationality {
        pass: violations.is_empty(),
        violations,
    }
}

pub fn verify_budget_balance(outcome: &AuctionOutcome) -> BudgetBalance {
    let surplus = auctioneer_surplus(outcome);
    BudgetBalance {
        pass: surplus >= -EPS,
        surplus,
    }
}

/// Reruns `mechanism` with one agent's valuation (buyer) or cost (seller)
/// scaled by each factor, everyone else truthful, and compares the agent's
/// utility measured against its true valuation or cost.
///
/// Factors are evaluated in parallel on the current rayon pool; the result
/// keeps the order of `factors`.
pub fn truthfulness_probe(
    scenario: &Scenario,
    agent: &str,
    factors: &[f64],
    mechanism: Mechanism,
    config: &MechanismConfig,
) -> Result<Vec<ProbeEntry>> {
    if let Some(bad) = factors.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "misreport factor must be positive, got {bad}"
        )));
    }
    let target = if let Some(i) = scenario.task_index(agent) {
        (Side::Buyer, i)
    } else if let Some(j) = scenario.device_index(agent) {
        (Side::Seller, j)
    } else {
        return Err(Error::UnknownAgent(agent.to_string()));
    };

    let truthful = mechanism.outcome(scenario, config)?;
    let (won_truthful, truthful_utility) = true_utility(scenario, scenario, &truthful, target);

    factors
        .par_iter()
        .map(|&factor| {
            let mut reported = scenario.clone();
            match target {
                (Side::Buyer, i) => reported.tasks[i].valuation *= factor,
                (Side::Seller, j) => reported.devices[j].cost *= factor,
            }
            let outcome = mechanism.outcome(&reported, config)?;
            let (won_misreport, misreport_utility) =
                true_utility(scenario, &reported, &outcome, target);
            Ok(ProbeEntry {
                agent: agent.to_string(),
                side: target.0,
                factor,
                truthful_utility,
                misreport_utility,
                won_truthful,
                won_misreport,
                profitable: misreport_utility > truthful_utility + EPS,
            })
        })
        .collect()
}

/// Winner flag and utility of the target agent, evaluated at its true bid.
/// `outcome` was produced from `reported`.
fn true_utility(
    truth: &Scenario,
    reported: &Scenario,
    outcome: &AuctionOutcome,
    target: (Side, usize),
) -> (bool, f64) {
    match target {
        (Side::Buyer, i) => {
            if !outcome.allocation.is_winner(i) {
                return (false, 0.0);
            }
            // Reported utility already nets out payment and distribution
            // cost; only the valuation term differs.
            (
                true,
                outcome.buyer_utilities[i] + truth.tasks[i].valuation - reported.tasks[i].valuation,
            )
        }
        (Side::Seller, j) => {
            let sold = outcome.device_assignments[j];
            if sold == 0 {
                return (false, 0.0);
            }
            (
                true,
                outcome.seller_revenues[j] - truth.devices[j].cost * sold as f64,
            )
        }
    }
}

/// Individual rationality and budget balance of a single outcome, plus a
/// probe of every agent at the given factors.
pub fn property_report(
    scenario: &Scenario,
    outcome: &AuctionOutcome,
    mechanism: Mechanism,
    config: &MechanismConfig,
    factors: &[f64],
) -> Result<PropertyReport> {
    let mut probes = Vec::new();
    if !factors.is_empty() {
        let agents = scenario
            .tasks
            .iter()
            .map(|t| t.id.as_str())
            .chain(scenario.devices.iter().map(|d| d.id.as_str()));
        for agent in agents {
            probes.extend(truthfulness_probe(
                scenario, agent, factors, mechanism, config,
            )?);
        }
    }
    Ok(PropertyReport {
        individual_rationality: verify_individual_rationality(scenario, outcome),
        budget_balance: verify_budget_balance(outcome),
        truthfulness_probe: probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_scenario, DeviceBid};
    use crate::pricing::PriceMatrix;
    use approx::assert_abs_diff_eq;

    fn reference_outcome() -> (Scenario, AuctionOutcome) {
        let s = reference_scenario();
        let o = Mechanism::Cda
            .outcome(&s, &MechanismConfig::default())
            .unwrap();
        (s, o)
    }

    #[test]
    fn distribution_costs() {
        let s = reference_scenario();
        assert_abs_diff_eq!(
            distribution_cost(&s.tasks[0], 0.01, 0.05),
            0.65,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            distribution_cost(&s.tasks[5], 0.01, 0.05),
            0.30,
            epsilon = 1e-12
        );
        assert_eq!(distribution_cost(&s.tasks[3], 0.0, 0.0), 0.0);
        assert_abs_diff_eq!(
            CostModel::Fanout.cost(&s.tasks[0], 5, 0.01, 0.05),
            0.10,
            epsilon = 1e-12
        );
    }

    #[test]
    fn reference_utilities() {
        let (_, o) = reference_outcome();
        let buyers = [2.00, 1.60, 2.60, 1.10, 2.80, 2.35];
        for (got, want) in o.buyer_utilities.iter().zip(buyers) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(o.seller_utilities[0], 2.99756, epsilon = 1e-5);
        assert!(o.seller_utilities.iter().all(|&u| u > 0.0));
    }

    #[test]
    fn losers_get_zero() {
        let s = reference_scenario();
        let x = AllocationMatrix::new(6, 5);
        assert_eq!(buyer_utility(&s, &x, &[5.0; 6], 0, CostModel::Units), 0.0);
        assert_eq!(seller_utility(&s, &x, &[5.0; 5], 0), 0.0);
    }

    #[test]
    fn clamped_single_pair_leaves_seller_at_zero() {
        let s = Scenario {
            resource_types: 2,
            alpha: 0.0,
            beta: 0.0,
            tasks: vec![TaskBid {
                id: "T".into(),
                demand: vec![4.0, 6.0],
                valuation: 1.0,
            }],
            devices: vec![DeviceBid {
                id: "D".into(),
                supply: vec![4.0, 6.0],
                capacity: 1,
                cost: 2.0,
            }],
        };
        let mut x = AllocationMatrix::new(1, 1);
        x.set(0, 0, true);
        x.set_winner(0, true);
        let o = settle(&s, x, CostModel::Units);
        assert_abs_diff_eq!(o.seller_utilities[0], 0.0, epsilon = 1e-12);
        // the buyer pays cost 2 for a valuation of 1
        let ir = verify_individual_rationality(&s, &o);
        assert!(!ir.pass);
        assert_eq!(ir.violations[0].id, "T");
    }

    #[test]
    fn reference_surplus_and_properties() {
        let (s, o) = reference_outcome();
        assert_abs_diff_eq!(auctioneer_surplus(&o), 0.0, epsilon = 1e-9);
        assert!(verify_budget_balance(&o).pass);
        let ir = verify_individual_rationality(&s, &o);
        assert!(ir.pass && ir.violations.is_empty());
    }

    #[test]
    fn empty_outcome_is_neutral() {
        let s = reference_scenario();
        let o = AuctionOutcome::empty(6, 5);
        assert_eq!(auctioneer_surplus(&o), 0.0);
        assert!(verify_budget_balance(&o).pass);
        assert!(verify_individual_rationality(&s, &o).pass);
        let m = metrics(&o);
        assert_eq!(
            (
                m.percentage_served_buyers,
                m.percentage_served_sellers,
                m.total_utility
            ),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn overpaying_auctioneer_fails_budget_balance() {
        let mut o = AuctionOutcome::empty(1, 1);
        o.buyer_payments[0] = 1.0;
        o.seller_revenues[0] = 2.0;
        let bb = verify_budget_balance(&o);
        assert!(!bb.pass);
        assert_eq!(bb.surplus, -1.0);
    }

    #[test]
    fn overcharged_buyer_is_listed() {
        let (s, mut o) = reference_outcome();
        o.buyer_utilities[3] = -0.5;
        let ir = verify_individual_rationality(&s, &o);
        assert_eq!(ir.violations.len(), 1);
        assert_eq!(ir.violations[0].id, "T4");
        assert_eq!(ir.violations[0].side, Side::Buyer);
    }

    #[test]
    fn reference_metrics() {
        let (_, o) = reference_outcome();
        let m = o.metrics;
        assert_eq!(m.percentage_served_buyers, 1.0);
        assert_eq!(m.percentage_served_sellers, 1.0);
        let buyers = 2.00 + 1.60 + 2.60 + 1.10 + 2.80 + 2.35;
        let sellers: f64 = o.seller_utilities.iter().sum();
        assert_abs_diff_eq!(m.total_utility, buyers + sellers, epsilon = 1e-9);
        assert_eq!(m.average_utility * 11.0, m.total_utility);
        let _ = PriceMatrix::zeros(1, 1);
    }

    #[test]
    fn identity_probe_is_noop() {
        let (s, truthful) = reference_outcome();
        let cfg = MechanismConfig::default();
        for agent in ["T2", "D4"] {
            let p = truthfulness_probe(&s, agent, &[1.0], Mechanism::Cda, &cfg).unwrap();
            assert_eq!(p[0].truthful_utility, p[0].misreport_utility);
            assert!(!p[0].profitable);
        }
        let mut same = s.clone();
        same.tasks[1].valuation *= 1.0;
        assert_eq!(Mechanism::Cda.outcome(&same, &cfg).unwrap(), truthful);
    }

    #[test]
    fn probe_rejects_bad_input() {
        let s = reference_scenario();
        let cfg = MechanismConfig::default();
        assert!(matches!(
            truthfulness_probe(&s, "nobody", &[1.0], Mechanism::Cda, &cfg),
            Err(Error::UnknownAgent(_))
        ));
        assert!(truthfulness_probe(&s, "T1", &[0.0], Mechanism::Cda, &cfg).is_err());
    }

    #[test]
    fn cost_model_parses() {
        assert_eq!("fanout".parse::<CostModel>().unwrap(), CostModel::Fanout);
        assert!("other".parse::<CostModel>().is_err());
    }
}
