//! The four mechanisms behind one entry point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{greedy_allocate, AllocationTrace};
use crate::baselines;
use crate::density::{rank, DensityRanking, DensityVariant};
use crate::economics::{settle, CostModel};
use crate::error::{Error, Result};
use crate::model::{AuctionOutcome, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    /// Greedy combinatorial double auction with midpoint pricing.
    Cda,
    /// One-to-one sorted double auction.
    Da,
    /// Uniformly random combinatorial assignment.
    Random,
    /// Maximum-cardinality one-to-one matching.
    Matching,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::Cda,
        Mechanism::Da,
        Mechanism::Random,
        Mechanism::Matching,
    ];

    /// One outcome for `scenario`. `Random` returns the single trial drawn
    /// from `config.seed`; use [`baselines::random_allocation`] for averages.
    pub fn outcome(self, scenario: &Scenario, config: &MechanismConfig) -> Result<AuctionOutcome> {
        match self {
            Mechanism::Cda => run_cda(scenario, config).map(|r| r.outcome),
            Mechanism::Da => Ok(baselines::double_auction(scenario)),
            Mechanism::Random => Ok(baselines::random_trial(
                scenario,
                config.seed,
                config.cost_model,
            )),
            Mechanism::Matching => Ok(baselines::maximum_matching(scenario, config.cost_model)),
        }
    }

    /// Whether outcomes are checked under combinatorial (coverage) or
    /// one-to-one semantics.
    pub fn is_combinatorial(self) -> bool {
        matches!(self, Mechanism::Cda | Mechanism::Random)
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Cda => "cda",
            Mechanism::Da => "da",
            Mechanism::Random => "random",
            Mechanism::Matching => "matching",
        })
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cda" => Ok(Mechanism::Cda),
            "da" => Ok(Mechanism::Da),
            "random" => Ok(Mechanism::Random),
            "matching" => Ok(Mechanism::Matching),
            other => Err(Error::InvalidArgument(format!(
                "unknown mechanism {other:?} (expected cda|da|random|matching)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub variant: DensityVariant,
    pub cost_model: CostModel,
    pub seed: u64,
    pub trials: usize,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        Self {
            variant: DensityVariant::Table,
            cost_model: CostModel::Units,
            seed: 0,
            trials: 2000,
        }
    }
}

/// Everything the combinatorial pipeline produces.
#[derive(Debug, Clone)]
pub struct CdaRun {
    pub ranking: DensityRanking,
    pub trace: AllocationTrace,
    pub outcome: AuctionOutcome,
}

/// Rank bids, allocate greedily, price and settle.
pub fn run_cda(scenario: &Scenario, config: &MechanismConfig) -> Result<CdaRun> {
    let ranking = rank(scenario, config.variant)?;
    let (allocation, trace) = greedy_allocate(scenario, &ranking, config.cost_model);
    let outcome = settle(scenario, allocation, config.cost_model);
    Ok(CdaRun {
        ranking,
        trace,
        outcome,
    })
}
