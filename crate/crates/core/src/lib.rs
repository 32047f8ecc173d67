//! Combinatorial double auction for assigning divisible sensing tasks to
//! resource-constrained devices in a device-to-device cloud.
//!
//! Tasks (buyers) bid a demand vector over resource types and a valuation;
//! devices (sellers) bid a per-assignment supply bundle, a capacity and a
//! per-assignment cost. The auction ranks both sides by bid density
//! ([`density`]), assigns bundles greedily ([`allocation`]), prices every
//! matched pair at the midpoint of per-unit valuation and per-unit cost
//! ([`pricing`]), and settles utilities ([`economics`]).
//!
//! ```
//! use coustic::mechanism::{run_cda, MechanismConfig};
//! use coustic::model::reference_scenario;
//!
//! let scenario = reference_scenario();
//! let run = run_cda(&scenario, &MechanismConfig::default()).unwrap();
//! assert_eq!(run.outcome.num_winning_tasks(), 6);
//! assert!(run.outcome.auctioneer_surplus.abs() < 1e-9);
//! ```
//!
//! [`baselines`] holds the comparison mechanisms, [`oracle`] an exact
//! solver for tiny instances, and [`harness`] the generator and reports
//! used by the `coustic` binary.

pub mod allocation;
pub mod baselines;
pub mod density;
pub mod economics;
pub mod error;
pub mod harness;
pub mod mechanism;
pub mod model;
pub mod oracle;
pub mod pricing;

pub use error::{Error, Result};
pub use mechanism::{Mechanism, MechanismConfig};
pub use model::{AuctionOutcome, DeviceBid, Scenario, TaskBid};
