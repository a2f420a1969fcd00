use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tlru_sim::cache::Policy;
use tlru_sim::config::{load_config, ExperimentConfig, Overrides};
use tlru_sim::ergodicity::DEFAULT_STATE_BUDGET;
use tlru_sim::experiment::{self, ClassifyRequest, CommandReport};
use tlru_sim::Result;

#[derive(Parser)]
#[command(name = "tlru-sim", version, about = "TTU-aware cache network simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the workload seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Force every cache node to one policy.
    #[arg(long)]
    policy: Option<Policy>,
    /// Override every cache node's capacity.
    #[arg(long)]
    cache_size: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = load_config(&self.config)?;
        cfg.apply(&Overrides {
            seed: self.seed,
            policy: self.policy,
            cache_size: self.cache_size,
        })?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the discrete-event simulation and write per-content results.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the Che model and write predicted hit probabilities.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Classify eviction policies on exhaustively enumerated small caches.
    Classify {
        #[arg(long, value_delimiter = ',', default_values_t = Policy::ALL.to_vec())]
        policies: Vec<Policy>,
        #[arg(long, value_delimiter = ',', default_values_t = [3u8, 4, 5])]
        catalog: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_values_t = [2u8, 3])]
        cache_size: Vec<u8>,
        #[arg(long, default_value_t = 2)]
        ttu_levels: u8,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        max_states: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate plot data for a bundled figure recipe (fig5..fig8).
    Reproduce {
        figure: String,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a bundled recipe config.
    Recipe { figure: String },
}

fn run(cli: Cli) -> Result<CommandReport> {
    match cli.command {
        Command::Simulate { config, common } => experiment::cmd_simulate(&config.load()?, &common.out, common.workers),
        Command::Analyze { config, common } => experiment::cmd_analyze(&config.load()?, &common.out),
        Command::Classify {
            policies,
            catalog,
            cache_size,
            ttu_levels,
            max_states,
            common,
        } => {
            let req = ClassifyRequest {
                policies,
                catalogs: catalog,
                caches: cache_size,
                ttu_levels,
                max_states,
            };
            experiment::cmd_classify(&req, &common.out, common.workers)
        }
        Command::Reproduce { figure, seed, common } => {
            experiment::cmd_reproduce(&figure, &common.out, seed, common.workers)
        }
        Command::Recipe { figure } => Ok(CommandReport {
            summary: experiment::recipe(&figure)?.to_string(),
            ..CommandReport::default()
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
