use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use weakspot_cli::commands;
use weakspot_cli::config::Experiment;

#[derive(Parser)]
#[command(
    name = "weakspot",
    about = "Identify weakened regions in elastic structures from uncertain sensor data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); may also be given as `--config`
    config_positional: Option<PathBuf>,
    #[arg(long = "config")]
    config_flag: Option<PathBuf>,
    /// Override the config's rng seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for per-quadrature-node solves (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<Experiment> {
        let path = match (&self.config_positional, &self.config_flag) {
            (Some(p), None) | (None, Some(p)) => p.clone(),
            (Some(_), Some(_)) => bail!("give the config either positionally or via --config"),
            (None, None) => bail!("missing config file"),
        };
        let mut experiment = Experiment::load(&path)?;
        if let Some(seed) = self.seed {
            experiment.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            experiment.out_dir = dir.clone();
        }
        if let Some(threads) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("setting --threads")?;
        }
        Ok(experiment)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the unweakened forward problem once and write the fields
    Forward {
        #[command(flatten)]
        common: Common,
        /// Random factors, comma separated (default: all ones)
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<f64>>,
    },
    /// Generate target measurements from the scenario
    Synthesize {
        #[command(flatten)]
        common: Common,
    },
    /// Run the inversion and write the recovered strength field
    Invert {
        #[command(flatten)]
        common: Common,
        /// Override the risk measure with CVaR at this beta
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Validate the adjoint gradient against central finite differences
    Gradcheck {
        #[command(flatten)]
        common: Common,
        /// Relative finite-difference step
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
    /// Run one inversion per beta into `out_dir/beta_<value>/`
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Beta values, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Forward { common, xi } => {
            let experiment = common.load()?;
            let outcome = commands::forward(&experiment, xi)?;
            println!("max |u| = {:e}", outcome.max_abs_displacement);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Synthesize { common } => {
            let experiment = common.load()?;
            let path = commands::synthesize_cmd(&experiment)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Invert { common, beta } => {
            let mut experiment = common.load()?;
            if let Some(beta) = beta {
                experiment.risk = weakspot_core::RiskSpec::cvar(beta)?;
            }
            let outcome = commands::invert(&experiment)?;
            println!(
                "{}: objective {:e} -> {:e} in {} iterations ({})",
                experiment.out_dir.display(),
                outcome.summary.initial_objective,
                outcome.summary.objective,
                outcome.summary.iterations,
                outcome.summary.stop,
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck { common, h } => {
            let experiment = common.load()?;
            let outcome = commands::gradcheck(&experiment, h)?;
            println!(
                "max relative error {:e} (tolerance {:e}, {} skipped)",
                outcome.max_relative_error, outcome.tolerance, outcome.skipped_elements
            );
            Ok(if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("gradient check failed");
                ExitCode::FAILURE
            })
        }
        Command::Sweep { common, beta } => {
            let experiment = common.load()?;
            let outcomes = commands::sweep(&experiment, &beta)?;
            for (b, outcome) in beta.iter().zip(&outcomes) {
                println!(
                    "beta {b}: objective {:e} in {} iterations -> {}",
                    outcome.summary.objective,
                    outcome.summary.iterations,
                    outcome.out_dir.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
