//! Compare the auction with the one-to-one double auction, random assignment
//! and maximum matching.
//!
//! cargo run --release --example compare_baselines [trials]

use coustic::harness::compare;
use coustic::mechanism::{Mechanism, MechanismConfig};
use coustic::model::reference_scenario;

fn main() -> coustic::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2000);
    let config = MechanismConfig {
        trials,
        ..MechanismConfig::default()
    };
    let report = compare(&reference_scenario(), &Mechanism::ALL, &config)?;

    println!(
        "{:<9} {:>8} {:>8} {:>9} {:>9}",
        "mechanism", "buyers", "sellers", "total", "ms"
    );
    for m in Mechanism::ALL {
        let r = &report.metrics[&m.to_string()];
        println!(
            "{:<9} {:>8.3} {:>8.3} {:>9.3} {:>9.3}",
            m.to_string(),
            r.percentage_served_buyers,
            r.percentage_served_sellers,
            r.total_utility,
            report.runtime_ms[&m.to_string()],
        );
    }
    for other in [Mechanism::Da, Mechanism::Random, Mechanism::Matching] {
        if let Some(g) = report.gain(Mechanism::Cda, other) {
            println!("cda vs {other}: {g:+.1}%");
        }
    }
    Ok(())
}
