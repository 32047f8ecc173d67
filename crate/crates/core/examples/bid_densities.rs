//! Normalized bids and density rankings under both device density variants.
//!
//! cargo run --example bid_densities

use coustic::density::DensityVariant;
use coustic::harness::density_report;
use coustic::model::reference_scenario;

fn main() -> coustic::Result<()> {
    let s = reference_scenario();
    for variant in [DensityVariant::Table, DensityVariant::Equation] {
        let report = density_report(&s, variant)?;
        println!("== {variant}");
        for row in report.tasks.iter().chain(&report.devices) {
            let norm: Vec<String> = row.normalized.iter().map(|x| format!("{x:.4}")).collect();
            println!(
                "{:<3} rank {}  density {:.6}  [{}]",
                row.id,
                row.rank,
                row.density,
                norm.join(" ")
            );
        }
    }
    Ok(())
}
