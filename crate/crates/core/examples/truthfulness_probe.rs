//! Misreport each agent's bid and see whether anyone gains. Winners can; the
//! check is that losers stay losers.
//!
//! cargo run --example truthfulness_probe

use coustic::economics::property_report;
use coustic::harness::DEFAULT_FACTORS;
use coustic::mechanism::{run_cda, Mechanism, MechanismConfig};
use coustic::model::reference_scenario;

fn main() -> coustic::Result<()> {
    let s = reference_scenario();
    let config = MechanismConfig::default();
    let outcome = run_cda(&s, &config)?.outcome;
    let report = property_report(&s, &outcome, Mechanism::Cda, &config, &DEFAULT_FACTORS)?;

    println!(
        "individual rationality: {}",
        report.individual_rationality.pass
    );
    println!(
        "budget balance: {} (surplus {:.2e})",
        report.budget_balance.pass, report.budget_balance.surplus
    );
    for p in report.truthfulness_probe.iter().filter(|p| p.profitable) {
        println!(
            "{:<3} x{:<5} {:.4} -> {:.4}{}",
            p.agent,
            p.factor,
            p.truthful_utility,
            p.misreport_utility,
            if p.won_truthful {
                ""
            } else {
                "  (loser gained)"
            }
        );
    }
    Ok(())
}
