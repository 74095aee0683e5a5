use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use evgraph::commands::{self, CommandError, Format};

#[derive(Parser)]
#[command(name = "evgraph", version, about = "Event-graph convolution accelerator simulator and sizing tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over an event file and optionally dump features
    Sim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the baseline and two-step dataflows layer by layer
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Parallel multiplier sizing table
    Size {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        paper_table: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Choose a variant per layer under the configured budget
    Explore {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write seeded int8 weights for the configured layers
    GenWeights {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<String, CommandError> {
    match cli.command {
        Command::Sim { config, events, out } => commands::cmd_sim(&config, &events, out.as_deref()).map(|r| r.to_json()),
        Command::Compare { config, events } => commands::cmd_compare(&config, &events).map(|r| r.to_json()),
        Command::Size { config, paper_table, format } => {
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            commands::cmd_size(config.as_deref(), paper_table, format)
        }
        Command::Explore { config } => commands::cmd_explore(&config).map(|r| r.to_json()),
        Command::GenWeights { config, seed, out } => commands::cmd_gen_weights(&config, seed, out.as_deref()).map(|r| r.to_json()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(report) = &e.report {
                print!("{}", report.to_json());
            }
            eprintln!("evgraph: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
