//! Run the combinatorial double auction on the built-in six-task, five-device
//! scenario and print who trades with whom, at what price.
//!
//! cargo run --example reference_auction

use coustic::mechanism::{run_cda, MechanismConfig};
use coustic::model::reference_scenario;
use coustic::pricing::resources_won;

fn main() -> coustic::Result<()> {
    let s = reference_scenario();
    let run = run_cda(&s, &MechanismConfig::default())?;
    let o = &run.outcome;

    println!("task order:   {:?}", run.ranking.task_order_ids(&s));
    println!("device order: {:?}", run.ranking.device_order_ids(&s));
    println!();

    for i in o.allocation.winning_tasks() {
        let devices: Vec<&str> = o
            .allocation
            .row(i)
            .map(|j| s.devices[j].id.as_str())
            .collect();
        println!(
            "{} <- {:<20} units {:>4}  pays {:>7.4}  utility {:.4}",
            s.tasks[i].id,
            devices.join(","),
            resources_won(&s, &o.allocation, i)?,
            o.buyer_payments[i],
            o.buyer_utilities[i],
        );
    }
    println!();
    for (j, d) in s.devices.iter().enumerate() {
        println!(
            "{}  {} assignments  revenue {:>8.4}  utility {:.4}",
            d.id, o.device_assignments[j], o.seller_revenues[j], o.seller_utilities[j]
        );
    }
    println!();
    println!("pair price T1/D1: {:.6}", o.prices.get(0, 0));
    println!(
        "total utility {:.4}, surplus {:.2e}",
        o.metrics.total_utility, o.auctioneer_surplus
    );
    Ok(())
}
