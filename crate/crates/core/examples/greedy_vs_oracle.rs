//! How close the greedy allocation gets to the exact welfare optimum on small
//! generated instances.
//!
//! cargo run --release --example greedy_vs_oracle [instances]

use coustic::allocation::greedy_allocate;
use coustic::density::{rank, DensityVariant};
use coustic::economics::CostModel;
use coustic::harness::{generate, GeneratorConfig, Range};
use coustic::model::EPS;
use coustic::oracle::{exhaustive_welfare, welfare, OracleLimits};

fn main() -> coustic::Result<()> {
    let instances: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let (mut optimal, mut ratios, mut worst) = (0, Vec::new(), 1.0f64);
    for seed in 0..instances {
        let s = generate(&GeneratorConfig {
            tasks: 4,
            devices: 4,
            resource_types: 2,
            capacity_range: Range { lo: 1, hi: 3 },
            valuation_range: Range { lo: 8.0, hi: 20.0 },
            seed,
            ..GeneratorConfig::default()
        })?;
        let exact = exhaustive_welfare(&s, OracleLimits::default(), CostModel::Units)?;
        let (x, _) = greedy_allocate(&s, &rank(&s, DensityVariant::Table)?, CostModel::Units);
        let greedy = welfare(&s, &x, CostModel::Units);
        if exact.best_welfare > EPS {
            let r = greedy / exact.best_welfare;
            worst = worst.min(r);
            ratios.push(r);
        }
        if (greedy - exact.best_welfare).abs() < 1e-9 {
            optimal += 1;
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    println!("{instances} instances, greedy optimal on {optimal}");
    println!("welfare ratio mean {mean:.4}, worst {worst:.4}");
    Ok(())
}
