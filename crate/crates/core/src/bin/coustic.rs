use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use coustic::density::DensityVariant;
use coustic::economics::{truthfulness_probe, CostModel};
use coustic::harness::{self, GeneratorConfig, DEFAULT_FACTORS};
use coustic::mechanism::{run_cda, Mechanism, MechanismConfig};
use coustic::model::{load_scenario, save_scenario, Scenario};
use coustic::oracle::OracleLimits;
use coustic::Error;

#[derive(Parser)]
#[command(
    name = "coustic",
    version,
    about = "Combinatorial double auction for D2D task offloading"
)]
struct Cli {
    /// Worker threads for random trials and probe factors.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "table")]
    variant: DensityVariant,
    #[arg(long = "cost-model", default_value = "units")]
    cost_model: CostModel,
    /// Overridden by COUSTIC_SEED when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mechanism and write its report.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "cda")]
        mechanism: Mechanism,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the greedy allocation trace as JSON lines (cda only).
        #[arg(long)]
        trace: bool,
    },
    /// Run several mechanisms and report relative gains.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "cda,da,random,matching")]
        mechanisms: Vec<Mechanism>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print normalized bids, densities and ranks.
    Densities {
        #[command(flatten)]
        common: Common,
    },
    /// Solve small instances exactly and compare with the greedy allocation.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long = "max-states")]
        max_states: Option<u128>,
    },
    /// Misreport one agent's bid by each factor and compare utilities.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        agent: String,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.5,0.75,0.9,1.1,1.25,1.5"
        )]
        factors: Vec<f64>,
        #[arg(long, default_value = "cda")]
        mechanism: Mechanism,
    },
    /// Check individual rationality, budget balance and probe every agent.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "cda")]
        mechanism: Mechanism,
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
        /// Exit with status 3 when rationality or budget balance fails.
        #[arg(long)]
        strict: bool,
    },
    /// Generate a random scenario.
    Gen {
        /// GeneratorConfig JSON; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        tasks: Option<usize>,
        #[arg(long)]
        devices: Option<usize>,
        #[arg(long = "resource-types")]
        resource_types: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Common {
    fn load(&self) -> anyhow::Result<Scenario> {
        let text = fs::read_to_string(&self.scenario)
            .with_context(|| format!("reading {}", self.scenario.display()))?;
        Ok(load_scenario(&text)?)
    }

    fn config(&self) -> anyhow::Result<MechanismConfig> {
        Ok(MechanismConfig {
            variant: self.variant,
            cost_model: self.cost_model,
            seed: seed_override()?.unwrap_or(self.seed),
            trials: self.trials,
        })
    }
}

fn seed_override() -> anyhow::Result<Option<u64>> {
    match std::env::var("COUSTIC_SEED") {
        Ok(v) => Ok(Some(
            v.trim()
                .parse()
                .context("COUSTIC_SEED must be an integer")?,
        )),
        Err(_) => Ok(None),
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

enum Outcome {
    Ok,
    PropertyFailure,
}

fn execute(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Run {
            common,
            mechanism,
            out,
            trace,
        } => {
            let scenario = common.load()?;
            let config = common.config()?;
            if trace {
                if mechanism != Mechanism::Cda {
                    return Err(
                        Error::InvalidArgument("--trace requires --mechanism cda".into()).into(),
                    );
                }
                print!("{}", run_cda(&scenario, &config)?.trace.to_json_lines());
            }
            let (report, _) = harness::run(&scenario, mechanism, &config, &[])?;
            emit(&report.to_json(), out.as_deref())?;
        }
        Command::Compare {
            common,
            mechanisms,
            out,
        } => {
            let scenario = common.load()?;
            let report = harness::compare(&scenario, &mechanisms, &common.config()?)?;
            emit(&report.to_json(), out.as_deref())?;
        }
        Command::Densities { common } => {
            let scenario = common.load()?;
            let report = harness::density_report(&scenario, common.variant)?;
            for (side, rows) in [("task", &report.tasks), ("device", &report.devices)] {
                println!(
                    "{:<8} {:<10} {:>10} {:>5}  normalized",
                    side, "id", "density", "rank"
                );
                for r in rows.iter() {
                    let norm: Vec<String> =
                        r.normalized.iter().map(|x| format!("{x:.6}")).collect();
                    println!(
                        "{:<8} {:<10} {:>10.6} {:>5}  ({})",
                        "",
                        r.id,
                        r.density,
                        r.rank,
                        norm.join(", ")
                    );
                }
            }
            print!("{}", report.to_json());
        }
        Command::Oracle { common, max_states } => {
            let scenario = common.load()?;
            let limits = max_states.map_or_else(OracleLimits::default, |max_states| OracleLimits {
                max_states,
            });
            let report = harness::oracle_report(&scenario, &common.config()?, limits)?;
            print!("{}", report.to_json());
        }
        Command::Probe {
            common,
            agent,
            factors,
            mechanism,
        } => {
            let scenario = common.load()?;
            let entries =
                truthfulness_probe(&scenario, &agent, &factors, mechanism, &common.config()?)?;
            print!("{}", harness::canonical_json(&entries));
        }
        Command::Verify {
            common,
            mechanism,
            factors,
            strict,
        } => {
            let scenario = common.load()?;
            let config = common.config()?;
            let factors = factors.unwrap_or_else(|| DEFAULT_FACTORS.to_vec());
            let (report, _) = harness::run(&scenario, mechanism, &config, &factors)?;
            let properties = report.properties.expect("run always checks properties");
            print!("{}", harness::canonical_json(&properties));
            if strict && !(properties.individual_rationality.pass && properties.budget_balance.pass)
            {
                return Ok(Outcome::PropertyFailure);
            }
        }
        Command::Gen {
            config,
            tasks,
            devices,
            resource_types,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).context("parsing generator config")?
                }
                None => GeneratorConfig::default(),
            };
            cfg.tasks = tasks.unwrap_or(cfg.tasks);
            cfg.devices = devices.unwrap_or(cfg.devices);
            cfg.resource_types = resource_types.unwrap_or(cfg.resource_types);
            cfg.seed = seed_override()?.or(seed).unwrap_or(cfg.seed);
            let scenario = harness::generate(&cfg)?;
            emit(&save_scenario(&scenario)?, out.as_deref())?;
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel.max(1))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFailure) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Invalid(_) | Error::Parse { .. }) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
