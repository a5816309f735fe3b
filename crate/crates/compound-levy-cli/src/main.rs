use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use compound_levy_cli::commands::{run_command, CommandError, OutputFormat};
use compound_levy_cli::config::RunConfig;

#[derive(Parser)]
#[command(name = "compound-levy", version, about = "Closed-form annual-loss models with a Monte Carlo cross-check")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Override the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form density and CDF over the grid.
    Eval,
    /// Value at risk at the configured quantile levels.
    Var,
    /// Series truncation window and dropped mass.
    Truncate,
    /// Monte Carlo empirical CDF next to the closed form.
    Simulate,
    /// Truncation-error curve or timing comparison.
    Study,
    /// Institution-wide loss across all configured cells.
    Aggregate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Var => "var",
            Command::Truncate => "truncate",
            Command::Simulate => "simulate",
            Command::Study => "study",
            Command::Aggregate => "aggregate",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not configure {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }

    let Some(config_path) = &cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match RunConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }

    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let rendered = match run_command(cli.command.name(), &cfg, format) {
        Ok(r) => r,
        Err(e @ CommandError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e @ CommandError::MassCheck { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };

    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::SUCCESS
}
