//! Time the full pipeline on generated markets of growing size.
//!
//! cargo run --release --example scale_generated

use std::time::Instant;

use coustic::harness::{generate, GeneratorConfig};
use coustic::mechanism::{run_cda, MechanismConfig};

fn main() -> coustic::Result<()> {
    for size in [50, 100, 250, 500, 1000] {
        let s = generate(&GeneratorConfig {
            tasks: size,
            devices: size,
            resource_types: 4,
            seed: 1,
            ..GeneratorConfig::default()
        })?;
        let start = Instant::now();
        let run = run_cda(&s, &MechanismConfig::default())?;
        let elapsed = start.elapsed();
        println!(
            "{size:>5}x{size:<5} {:>9.2?}  visits {:>8}  winners {}/{}",
            elapsed,
            run.trace.pair_visits,
            run.outcome.num_winning_tasks(),
            run.outcome.num_winning_devices(),
        );
    }
    Ok(())
}
