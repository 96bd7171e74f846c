//! `awlc`: run load-balancing scenarios, compare schedulers and replay
//! recorded telemetry.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use awlc_core::SchedulerKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "awlc", version, about = "Adaptive weighted least-connection load-balancing simulator")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheduler over a scenario and write per-server and summary CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the scheduler named in the config.
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        #[arg(long, default_value_t = 1)]
        replications: usize,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run LC, WLC and AWLC on identical workloads and report which wins.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 30)]
        replications: usize,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Apply a telemetry file to the scenario's fleet and log each weight change.
    Replay {
        #[arg(long)]
        telemetry: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the reference scenario config for a task count.
    ExampleConfig {
        #[arg(long, default_value_t = 150)]
        tasks: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Run {
            config,
            scheduler,
            replications,
            out,
            seed,
        } => commands::run(&commands::RunSpec {
            config,
            out,
            scheduler,
            replications,
            seed,
        }),
        Command::Compare {
            config,
            replications,
            out,
            seed,
        } => commands::compare(&commands::RunSpec {
            config,
            out,
            scheduler: None,
            replications,
            seed,
        }),
        Command::Replay {
            telemetry,
            config,
            seed,
        } => commands::replay(&telemetry, &config, seed),
        Command::ExampleConfig { tasks } => {
            print!("{}", awlc_core::ScenarioConfig::reference(tasks).to_toml_string());
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.exit_code)
        }
    }
}
