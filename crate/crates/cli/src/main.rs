#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hydrounit::config::{Config, Grid};
use hydrounit::model::GovernorRow;
use hydrounit::transient::StartMode;
use hydrounit::{Error, Result};

use commands::{Context, SimulateArgs};

#[derive(Parser)]
#[command(name = "hydrounit", version, about = "Hydropower unit model: steady states, local stability, transient regimes")]
struct Cli {
    /// JSON file overriding the bundled defaults (partial documents are merged).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for random perturbations and test vectors.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Row {
    Linear,
    Deadband,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    Chained,
    Cold,
}

#[derive(Subcommand)]
enum Command {
    /// Balance curves and all steady-state branches over a voltage grid.
    Equilibria {
        /// Voltage grid as start:end:points.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
    },
    /// Routh-Hurwitz and eigenvalue verdicts over a voltage grid.
    Stability {
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        /// Linearization of the governor at zero slip.
        #[arg(long, value_enum)]
        row: Option<Row>,
        /// Use the Jacobian entries exactly as published.
        #[arg(long)]
        published: bool,
    },
    /// One transient scenario.
    Simulate {
        /// rated, reduced-089, reduced-07 or custom.
        #[arg(long, default_value = "rated")]
        scenario: String,
        /// Voltage ratio for the custom scenario.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_enum)]
        start: Option<Start>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        t_discard: Option<f64>,
        /// Start a custom run from the operating state, perturbed by this relative size.
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Oscillation amplitude after voltage steps from the rated regime.
    Amplitude {
        /// Comma-separated voltage ratios.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Derived data, flux inversion and Jacobian checks.
    Check {
        /// Number of operating points for the Jacobian comparison.
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:end:points".into());
    }
    let start = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
    let end = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
    let points = parts[2].parse::<usize>().map_err(|e| e.to_string())?;
    if points == 0 || !(start > 0.0) || !(end >= start) {
        return Err("need 0 < start <= end and points >= 1".into());
    }
    Ok(Grid { start, end, points })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::param("jobs", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::param("jobs", e.to_string()))?;
    }
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::defaults(),
    };
    let ctx = Context { config, out: cli.out, seed: cli.seed };
    match cli.command {
        Command::Equilibria { grid } => commands::equilibria(&ctx, grid),
        Command::Stability { grid, row, published } => {
            let row = row.map(|r| match r {
                Row::Linear => GovernorRow::Linear,
                Row::Deadband => GovernorRow::Deadband,
            });
            commands::stability(&ctx, grid, row, published)
        }
        Command::Simulate { scenario, gamma, start, t_end, t_discard, perturb } => {
            let start = start.map(|s| match s {
                Start::Chained => StartMode::Chained,
                Start::Cold => StartMode::Cold,
            });
            commands::simulate(&ctx, &SimulateArgs { scenario, gamma, start, t_end, t_discard, perturb })
        }
        Command::Amplitude { betas, t_end } => commands::amplitude(&ctx, betas, t_end),
        Command::Check { points } => commands::check(&ctx, points),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
